//! End-to-end simulation: n GV sources, Bernoulli routing, local M/D/1
//! queues and the shared HAP M/D/c queue.

use rand::distr::{Bernoulli, Distribution};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;

use super::event::{Class, EventList};
use super::station::{Started, Station};
use super::stats::{BatchMeans, Batcher, DispersionCounter, Estimate, QueueMonitor, QueueStats};
use super::{check_budget, substream, DEFAULT_WARMUP_FRACTION};
use crate::error::{Error, Result};
use crate::scenario::ScenarioConfig;

/// Latency slack when comparing against the deadline, s.
const DEADLINE_SLACK: f64 = 1e-12;
/// Expected HAP arrivals per dispersion window.
const DISPERSION_WINDOW_MEAN: f64 = 25.0;

/// One run of the full system.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scenario: ScenarioConfig,
    pub eta: f64,
    /// Frames generated across all GVs, warmup included.
    pub frame_budget: u64,
    pub warmup_fraction: f64,
    pub seed: u64,
    /// Run even if a queue is overloaded; used to observe divergence.
    pub allow_unstable: bool,
}

impl SimConfig {
    pub fn new(scenario: ScenarioConfig, eta: f64, frame_budget: u64, seed: u64) -> Self {
        Self {
            scenario,
            eta,
            frame_budget,
            warmup_fraction: DEFAULT_WARMUP_FRACTION,
            seed,
            allow_unstable: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        check_budget(self.frame_budget)?;
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidParameter {
                name: "eta",
                reason: format!("must lie in [0, 1], got {}", self.eta),
            });
        }
        if !(0.0..0.5).contains(&self.warmup_fraction) {
            return Err(Error::InvalidParameter {
                name: "warmup_fraction",
                reason: format!("must lie in [0, 0.5), got {}", self.warmup_fraction),
            });
        }
        if !self.allow_unstable {
            for spec in [self.scenario.gv_queue(self.eta)?, self.scenario.hap_queue(self.eta)?] {
                if spec.arrival_rate() > 0.0 && !spec.is_stable() {
                    return Err(Error::UnstableQueue {
                        offered: spec.offered_traffic(),
                        servers: spec.servers(),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Path {
    Local,
    Hap,
}

impl Path {
    pub fn as_str(&self) -> &'static str {
        match self {
            Path::Local => "gv",
            Path::Hap => "hap",
        }
    }
}

/// Per-frame outcome, emitted for measured frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameRecord {
    pub frame_id: u64,
    pub path: Path,
    pub gen_time: f64,
    pub end_time: f64,
    pub met_deadline: bool,
}

/// Statistics for the frames that took one path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathStats {
    pub frames: u64,
    pub queue: QueueStats,
    /// End-to-end latency, s.
    pub latency: Estimate,
    /// Fraction of frames finishing within the deadline.
    pub deadline_hit: Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimStats {
    pub frames: u64,
    pub gv: Option<PathStats>,
    pub hap: Option<PathStats>,
    pub latency: Estimate,
    pub deadline_hit: Estimate,
    /// Variance-to-mean ratio of HAP arrival counts in fixed windows.
    pub hap_dispersion: Option<f64>,
}

enum Event {
    Generate { gv: usize },
    HapArrival { id: u64, gen: f64 },
    HapDeparture,
    GvDeparture { gv: usize },
}

struct PathAcc {
    latency: BatchMeans,
    hits: BatchMeans,
}

impl PathAcc {
    fn new() -> Self {
        Self {
            latency: BatchMeans::new(),
            hits: BatchMeans::new(),
        }
    }
}

pub fn simulate_system(sim: &SimConfig) -> Result<SimStats> {
    simulate_system_traced(sim, |_| {})
}

/// As [`simulate_system`], handing every measured frame to `trace`.
pub fn simulate_system_traced(sim: &SimConfig, mut trace: impl FnMut(&FrameRecord)) -> Result<SimStats> {
    sim.validate()?;
    let cfg = &sim.scenario;
    let n = cfg.gv_count as usize;
    let t_max = cfg.deadline();
    let d_gv = cfg.compute.gv_service_time();
    let d_hap = cfg.compute.hap_service_time();
    let comm = cfg.comm_delays(sim.eta)?;
    let to_hap = comm.uplink.transmission_time + comm.uplink.propagation_delay;
    let from_hap = comm.downlink.transmission_time + comm.downlink.propagation_delay;

    let interarrival = Exp::new(cfg.frame_rate).map_err(|e| Error::InvalidParameter {
        name: "frame_rate",
        reason: e.to_string(),
    })?;
    let routing = Bernoulli::new(sim.eta).map_err(|e| Error::InvalidParameter {
        name: "eta",
        reason: e.to_string(),
    })?;
    let mut route_rng = substream(sim.seed, 0);
    let mut source_rngs: Vec<ChaCha8Rng> = (0..n).map(|g| substream(sim.seed, 1 + g as u64)).collect();

    let warmup = (sim.frame_budget as f64 * sim.warmup_fraction) as u64;
    let batcher = Batcher::new(sim.frame_budget, warmup);

    let mut gv_stations = vec![Station::new(1); n];
    let mut hap = Station::new(cfg.compute.hap_servers as usize);
    let mut gv_mon = QueueMonitor::new(n);
    let mut hap_mon = QueueMonitor::new(cfg.compute.hap_servers as usize);
    let hap_rate = sim.eta * cfg.frame_rate * n as f64;
    let mut dispersion = (hap_rate > 0.0).then(|| DispersionCounter::new(DISPERSION_WINDOW_MEAN / hap_rate));
    // Generation time of each frame still in a queue, indexed by id.
    let mut gen_times: std::collections::HashMap<u64, f64> = std::collections::HashMap::new();

    let mut local = PathAcc::new();
    let mut offload = PathAcc::new();
    let mut blended = PathAcc::new();

    let mut events = EventList::new();
    for (g, rng) in source_rngs.iter_mut().enumerate() {
        events.schedule(interarrival.sample(rng), Class::Arrival, Event::Generate { gv: g });
    }
    let mut generated = 0u64;

    let mut finish = |id: u64, path: Path, gen: f64, end: f64, trace: &mut dyn FnMut(&FrameRecord)| {
        let Some(b) = batcher.batch(id) else { return };
        let latency = end - gen;
        let met = latency <= t_max + DEADLINE_SLACK;
        let hit = if met { 1.0 } else { 0.0 };
        let acc = match path {
            Path::Local => &mut local,
            Path::Hap => &mut offload,
        };
        acc.latency.add(b, latency);
        acc.hits.add(b, hit);
        blended.latency.add(b, latency);
        blended.hits.add(b, hit);
        trace(&FrameRecord {
            frame_id: id,
            path,
            gen_time: gen,
            end_time: end,
            met_deadline: met,
        });
    };

    while let Some((now, event)) = events.pop() {
        gv_mon.advance(now);
        hap_mon.advance(now);
        match event {
            Event::Generate { gv } => {
                if generated == sim.frame_budget {
                    continue;
                }
                let id = generated;
                generated += 1;
                events.schedule(
                    now + interarrival.sample(&mut source_rngs[gv]),
                    Class::Arrival,
                    Event::Generate { gv },
                );
                if routing.sample(&mut route_rng) {
                    events.schedule(now + to_hap, Class::Arrival, Event::HapArrival { id, gen: now });
                    continue;
                }
                let station = &mut gv_stations[gv];
                if id >= warmup {
                    gv_mon.record_arrival(now, station.occupancy());
                }
                match station.arrive(id, now) {
                    Some(s) => {
                        gv_mon.started_on_arrival();
                        if let Some(b) = batcher.batch(id) {
                            gv_mon.waits.add(b, 0.0);
                        }
                        finish(id, Path::Local, now, s.start + d_gv, &mut trace);
                        events.schedule(s.start + d_gv, Class::Departure, Event::GvDeparture { gv });
                    }
                    None => {
                        gv_mon.queued_on_arrival();
                    }
                }
            }
            Event::GvDeparture { gv } => {
                let next = gv_stations[gv].depart(now);
                gv_mon.departed(next.is_some());
                if let Some(Started { id, arrival, start }) = next {
                    if let Some(b) = batcher.batch(id) {
                        gv_mon.waits.add(b, start - arrival);
                    }
                    finish(id, Path::Local, arrival, start + d_gv, &mut trace);
                    events.schedule(start + d_gv, Class::Departure, Event::GvDeparture { gv });
                }
            }
            Event::HapArrival { id, gen } => {
                if id >= warmup {
                    hap_mon.record_arrival(now, hap.occupancy());
                    if let Some(d) = &mut dispersion {
                        d.add(now);
                    }
                }
                match hap.arrive(id, now) {
                    Some(s) => {
                        hap_mon.started_on_arrival();
                        if let Some(b) = batcher.batch(id) {
                            hap_mon.waits.add(b, 0.0);
                        }
                        finish(id, Path::Hap, gen, s.start + d_hap + from_hap, &mut trace);
                        events.schedule(s.start + d_hap, Class::Departure, Event::HapDeparture);
                    }
                    None => {
                        hap_mon.queued_on_arrival();
                        gen_times.insert(id, gen);
                    }
                }
            }
            Event::HapDeparture => {
                let next = hap.depart(now);
                hap_mon.departed(next.is_some());
                if let Some(Started { id, arrival, start }) = next {
                    if let Some(b) = batcher.batch(id) {
                        hap_mon.waits.add(b, start - arrival);
                    }
                    let gen = gen_times.remove(&id).expect("queued HAP frame has a generation time");
                    finish(id, Path::Hap, gen, start + d_hap + from_hap, &mut trace);
                    events.schedule(start + d_hap, Class::Departure, Event::HapDeparture);
                }
            }
        }
    }

    let path_stats = |acc: &PathAcc, mon: &QueueMonitor| {
        let frames = acc.hits.count();
        (frames > 0).then(|| PathStats {
            frames,
            queue: mon.finish(),
            latency: acc.latency.estimate(),
            deadline_hit: acc.hits.estimate(),
        })
    };
    Ok(SimStats {
        frames: blended.hits.count(),
        gv: path_stats(&local, &gv_mon),
        hap: path_stats(&offload, &hap_mon),
        latency: blended.latency.estimate(),
        deadline_hit: blended.hits.estimate(),
        hap_dispersion: dispersion.and_then(|d| d.index_of_dispersion()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latency::rt_prob;

    fn cfg() -> ScenarioConfig {
        ScenarioConfig {
            gv_count: 20,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut sim = SimConfig::new(cfg(), 0.5, 1000, 1);
        assert!(matches!(simulate_system(&sim), Err(Error::InvalidParameter { name: "frame_budget", .. })));
        sim.frame_budget = 20_000;
        sim.warmup_fraction = 0.5;
        assert!(matches!(simulate_system(&sim), Err(Error::InvalidParameter { name: "warmup_fraction", .. })));
        sim.warmup_fraction = 0.1;
        sim.eta = 1.5;
        assert!(matches!(simulate_system(&sim), Err(Error::InvalidParameter { name: "eta", .. })));
        let mut hot = cfg();
        hot.frame_rate = 20.0;
        assert!(matches!(
            simulate_system(&SimConfig::new(hot, 0.0, 20_000, 1)),
            Err(Error::UnstableQueue { .. })
        ));
    }

    #[test]
    fn all_local_has_no_hap_stats() {
        let s = simulate_system(&SimConfig::new(cfg(), 0.0, 20_000, 5)).unwrap();
        assert!(s.hap.is_none());
        assert!(s.hap_dispersion.is_none());
        let gv = s.gv.unwrap();
        assert_eq!(gv.frames, s.frames);
        assert_eq!(s.frames, 18_000);
    }

    #[test]
    fn unreachable_deadline_gives_zero_hits() {
        let mut c = cfg();
        c.deadline = Some(c.comm_delays(1.0).unwrap().total() * 0.5);
        let s = simulate_system(&SimConfig::new(c, 1.0, 20_000, 5)).unwrap();
        assert!(s.gv.is_none());
        assert_eq!(s.deadline_hit.mean, 0.0);
    }

    #[test]
    fn trace_covers_measured_frames() {
        let sim = SimConfig::new(cfg(), 0.4, 20_000, 9);
        let mut records = Vec::new();
        let s = simulate_system_traced(&sim, |r| records.push(*r)).unwrap();
        assert_eq!(records.len() as u64, s.frames);
        let hits = records.iter().filter(|r| r.met_deadline).count() as f64;
        assert!((hits / records.len() as f64 - s.deadline_hit.mean).abs() < 1e-12);
        assert!(records.iter().all(|r| r.end_time > r.gen_time && r.frame_id >= 2000));
        assert_eq!(simulate_system(&sim).unwrap(), s);
    }

    #[test]
    fn blended_hits_near_analysis() {
        let c = cfg();
        let eta = 0.5;
        let s = simulate_system(&SimConfig::new(c.clone(), eta, 200_000, 11)).unwrap();
        let p = rt_prob(eta, &c, c.deadline()).unwrap();
        assert!((s.deadline_hit.mean - p).abs() < 0.05, "{} vs {p}", s.deadline_hit.mean);
    }
}
