//! Per-path delay models and deadline-hit probabilities.
//!
//! A GV processes its local frames in an M/D/1 queue; offloaded frames cross
//! the radio link and share the HAP's M/D/c queue. Deadline probabilities
//! count how many frames ahead of an arrival can be cleared within the
//! budget, treating residual service of in-service frames as uniform.

use crate::error::Result;
use crate::queueing::{solve_stationary, StateDistribution, TruncationRule};
use crate::scenario::ScenarioConfig;

/// FLOP cost of a frame and the compute capacity at each end.
#[derive(Debug, Clone, PartialEq)]
pub struct ComputeProfile {
    /// FLOP per frame.
    pub frame_load: f64,
    /// FLOP/s on board each GV.
    pub gv_capacity: f64,
    /// FLOP/s per HAP server.
    pub hap_capacity: f64,
    pub hap_servers: u32,
}

impl ComputeProfile {
    pub fn gv_service_time(&self) -> f64 {
        self.frame_load / self.gv_capacity
    }

    pub fn hap_service_time(&self) -> f64 {
        self.frame_load / self.hap_capacity
    }
}

impl Default for ComputeProfile {
    fn default() -> Self {
        Self {
            frame_load: 60e9,
            gv_capacity: 800e9,
            hap_capacity: 3000e9,
            hap_servers: 15,
        }
    }
}

/// Mean delay of one path, split by cause. All values in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DelayBreakdown {
    pub wait: f64,
    pub service: f64,
    pub uplink: f64,
    pub downlink: f64,
    pub round_trip_propagation: f64,
    pub total: f64,
}

impl DelayBreakdown {
    fn new(wait: f64, service: f64, uplink: f64, downlink: f64, round_trip_propagation: f64) -> Self {
        Self {
            wait,
            service,
            uplink,
            downlink,
            round_trip_propagation,
            total: round_trip_propagation + uplink + downlink + wait + service,
        }
    }
}

/// How many frames ahead of an arrival still let it meet the deadline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeadlineBudget {
    /// Frames in system that are always cleared in time.
    pub f_max: u64,
    /// Fractional part of the budget in service times, in `[0, 1)`.
    pub delta: f64,
    /// `false` when the link alone exceeds the deadline.
    pub feasible: bool,
}

impl DeadlineBudget {
    const INFEASIBLE: Self = Self {
        f_max: 0,
        delta: 0.0,
        feasible: false,
    };
}

/// Splits `x` into floor and fractional part, snapping values that sit
/// within round-off of an integer.
fn split_budget(x: f64) -> (u64, f64) {
    let nearest = x.round();
    let x = if (x - nearest).abs() <= 1e-9 * x.abs().max(1.0) {
        nearest
    } else {
        x
    };
    let floor = x.floor();
    (floor as u64, x - floor)
}

/// Budget at the HAP: `x = (t_max - comm) / D`, `f_max = c floor(x)`.
pub fn deadline_budget_hap(t_max: f64, comm_delay: f64, service_time: f64, servers: u32) -> DeadlineBudget {
    let x = (t_max - comm_delay) / service_time;
    if !(x >= 0.0) {
        return DeadlineBudget::INFEASIBLE;
    }
    let (whole, delta) = split_budget(x);
    DeadlineBudget {
        f_max: u64::from(servers) * whole,
        delta,
        feasible: true,
    }
}

/// Budget at a GV: `x = t_max / D`, `f_max = floor(x)`.
pub fn deadline_budget_gv(t_max: f64, service_time: f64) -> DeadlineBudget {
    let x = t_max / service_time;
    if !(x >= 0.0) {
        return DeadlineBudget::INFEASIBLE;
    }
    let (f_max, delta) = split_budget(x);
    DeadlineBudget {
        f_max,
        delta,
        feasible: true,
    }
}

/// `C(n, k) p^k (1 - p)^(n - k)`.
pub fn binomial_pmf(k: u32, n: u32, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut coef = 1.0;
    for i in 0..k {
        coef *= f64::from(n - i) / f64::from(i + 1);
    }
    coef * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

/// Probability that a frame offloaded to the HAP meets its deadline.
///
/// Frames finding fewer than `f_max` in system always make it; finding
/// `f_max + j` they make it when at least `j + 1` of the `c` in-service frames
/// are within `delta` of completion.
pub fn rt_prob_hap(dist: &StateDistribution, budget: &DeadlineBudget) -> f64 {
    // No full service fits in the budget.
    if !budget.feasible || budget.f_max == 0 {
        return 0.0;
    }
    let head: f64 = (0..budget.f_max as usize).map(|i| dist.state_probability(i)).sum();
    (head + hap_residual(dist, budget)).clamp(0.0, 1.0)
}

/// The binomial partial-service term of [`rt_prob_hap`].
pub fn hap_residual(dist: &StateDistribution, budget: &DeadlineBudget) -> f64 {
    if !budget.feasible || budget.f_max == 0 || budget.delta == 0.0 {
        return 0.0;
    }
    let c = dist.spec().servers();
    let f_max = budget.f_max as usize;
    let mut partial = 0.0;
    let mut sum = 0.0;
    for k in 1..=c {
        partial += dist.state_probability(f_max + k as usize - 1);
        sum += binomial_pmf(k, c, budget.delta) * partial;
    }
    sum
}

/// Probability that a frame processed on board meets its deadline.
pub fn rt_prob_gv(dist: &StateDistribution, budget: &DeadlineBudget) -> f64 {
    // The arriving frame needs one full service of its own.
    if !budget.feasible || budget.f_max == 0 {
        return 0.0;
    }
    let head: f64 = (0..budget.f_max as usize).map(|i| dist.state_probability(i)).sum();
    (head + gv_residual(dist, budget)).clamp(0.0, 1.0)
}

/// The `delta p_f` partial-service term of [`rt_prob_gv`].
pub fn gv_residual(dist: &StateDistribution, budget: &DeadlineBudget) -> f64 {
    if !budget.feasible || budget.f_max == 0 {
        return 0.0;
    }
    budget.delta * dist.state_probability(budget.f_max as usize)
}

/// Queue solution, mean delay and deadline probability of one path.
#[derive(Debug, Clone)]
pub struct PathAnalysis {
    pub distribution: StateDistribution,
    pub delay: DelayBreakdown,
    pub budget: DeadlineBudget,
    pub deadline_prob: f64,
}

fn mean_wait(dist: &StateDistribution) -> Result<f64> {
    if dist.spec().arrival_rate() == 0.0 {
        Ok(0.0)
    } else {
        dist.mean_waiting_time()
    }
}

/// Local path at offloading factor `eta`.
pub fn analyze_gv_path(eta: f64, cfg: &ScenarioConfig, t_max: f64) -> Result<PathAnalysis> {
    let spec = cfg.gv_queue(eta)?;
    let distribution = solve_stationary(&spec, &TruncationRule::default())?;
    let service = spec.service_time();
    let delay = DelayBreakdown::new(mean_wait(&distribution)?, service, 0.0, 0.0, 0.0);
    let budget = deadline_budget_gv(t_max, service);
    let deadline_prob = rt_prob_gv(&distribution, &budget);
    Ok(PathAnalysis {
        distribution,
        delay,
        budget,
        deadline_prob,
    })
}

/// Offloaded path at offloading factor `eta`.
pub fn analyze_hap_path(eta: f64, cfg: &ScenarioConfig, t_max: f64) -> Result<PathAnalysis> {
    let spec = cfg.hap_queue(eta)?;
    let comm = cfg.comm_delays(eta)?;
    let distribution = solve_stationary(&spec, &TruncationRule::default())?;
    let service = spec.service_time();
    let delay = DelayBreakdown::new(
        mean_wait(&distribution)?,
        service,
        comm.uplink.transmission_time,
        comm.downlink.transmission_time,
        comm.round_trip_propagation(),
    );
    let budget = deadline_budget_hap(t_max, comm.total(), service, spec.servers());
    let deadline_prob = rt_prob_hap(&distribution, &budget);
    Ok(PathAnalysis {
        distribution,
        delay,
        budget,
        deadline_prob,
    })
}

/// Mean local delay: M/D/1 wait plus on-board processing.
pub fn gv_delay(eta: f64, cfg: &ScenarioConfig) -> Result<DelayBreakdown> {
    analyze_gv_path(eta, cfg, cfg.deadline()).map(|p| p.delay)
}

/// Mean offloaded delay: link, propagation, M/D/c wait and HAP processing.
pub fn hap_delay(eta: f64, cfg: &ScenarioConfig) -> Result<DelayBreakdown> {
    analyze_hap_path(eta, cfg, cfg.deadline()).map(|p| p.delay)
}

/// Real-time probability `eta P_HAP + (1 - eta) P_GV`; a path that carries no
/// frames is skipped.
pub fn rt_prob(eta: f64, cfg: &ScenarioConfig, t_max: f64) -> Result<f64> {
    let hap = if eta > 0.0 {
        eta * analyze_hap_path(eta, cfg, t_max)?.deadline_prob
    } else {
        0.0
    };
    let gv = if eta < 1.0 {
        (1.0 - eta) * analyze_gv_path(eta, cfg, t_max)?.deadline_prob
    } else {
        0.0
    };
    Ok(hap + gv)
}

/// Part of [`rt_prob`] contributed by the partial-service terms.
///
/// These terms treat the remaining service of in-service frames as uniform,
/// which is an approximation; with `delta = 0` the deadline probability is
/// exact for FCFS deterministic service.
pub fn residual_mass(eta: f64, cfg: &ScenarioConfig, t_max: f64) -> Result<f64> {
    let hap = if eta > 0.0 {
        let p = analyze_hap_path(eta, cfg, t_max)?;
        eta * hap_residual(&p.distribution, &p.budget)
    } else {
        0.0
    };
    let gv = if eta < 1.0 {
        let p = analyze_gv_path(eta, cfg, t_max)?;
        (1.0 - eta) * gv_residual(&p.distribution, &p.budget)
    } else {
        0.0
    };
    Ok(hap + gv)
}

/// Average frame latency `eta t_HAP + (1 - eta) t_GV`.
pub fn avg_latency(eta: f64, cfg: &ScenarioConfig) -> Result<f64> {
    let hap = if eta > 0.0 {
        eta * hap_delay(eta, cfg)?.total
    } else {
        0.0
    };
    let gv = if eta < 1.0 {
        (1.0 - eta) * gv_delay(eta, cfg)?.total
    } else {
        0.0
    };
    Ok(hap + gv)
}
