//! Stand-alone M/D/c simulation.

use rand_distr::{Distribution, Exp};

use super::event::{Class, EventList};
use super::station::{Started, Station};
use super::stats::{Batcher, QueueMonitor, QueueStats};
use super::{check_budget, substream, DEFAULT_WARMUP_FRACTION};
use crate::error::{Error, Result};
use crate::queueing::QueueSpec;

enum Event {
    Arrival,
    Departure,
}

/// Simulates `frames` arrivals to `spec` and summarizes the stationary part.
///
/// The first tenth of the arrivals warms the system up and is not measured.
pub fn simulate_mdc(spec: &QueueSpec, frames: u64, seed: u64) -> Result<QueueStats> {
    check_budget(frames)?;
    if !spec.is_stable() {
        return Err(Error::UnstableQueue {
            offered: spec.offered_traffic(),
            servers: spec.servers(),
        });
    }
    if spec.arrival_rate() == 0.0 {
        return Err(Error::ZeroArrivalRate);
    }
    let interarrival = Exp::new(spec.arrival_rate()).map_err(|e| Error::InvalidParameter {
        name: "arrival_rate",
        reason: e.to_string(),
    })?;
    let mut rng = substream(seed, 0);
    let service = spec.service_time();
    let warmup = (frames as f64 * DEFAULT_WARMUP_FRACTION) as u64;
    let batcher = Batcher::new(frames, warmup);

    let mut station = Station::new(spec.servers() as usize);
    let mut monitor = QueueMonitor::new(spec.servers() as usize);
    let mut events = EventList::new();
    let mut generated = 0u64;
    events.schedule(interarrival.sample(&mut rng), Class::Arrival, Event::Arrival);

    let on_start = |s: Started, monitor: &mut QueueMonitor, events: &mut EventList<Event>| {
        if let Some(b) = batcher.batch(s.id) {
            monitor.waits.add(b, s.start - s.arrival);
        }
        events.schedule(s.start + service, Class::Departure, Event::Departure);
    };

    while let Some((now, event)) = events.pop() {
        monitor.advance(now);
        match event {
            Event::Arrival => {
                let id = generated;
                generated += 1;
                if generated < frames {
                    events.schedule(now + interarrival.sample(&mut rng), Class::Arrival, Event::Arrival);
                }
                if id >= warmup {
                    monitor.record_arrival(now, station.occupancy());
                }
                match station.arrive(id, now) {
                    Some(s) => {
                        monitor.started_on_arrival();
                        on_start(s, &mut monitor, &mut events);
                    }
                    None => monitor.queued_on_arrival(),
                }
            }
            Event::Departure => {
                let next = station.depart(now);
                monitor.departed(next.is_some());
                if let Some(s) = next {
                    on_start(s, &mut monitor, &mut events);
                }
            }
        }
    }
    Ok(monitor.finish())
}
