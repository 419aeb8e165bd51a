//! Stationary analysis of M/D/1 and M/D/c queues.
//!
//! The number of frames in system at time `t + D` equals the frames still
//! waiting at `t` plus the Poisson arrivals in `(t, t + D]`. This gives the
//! balance equations
//!
//! ```text
//! p_j = a_j * sum_{k=0}^{c} p_k + sum_{k=c+1}^{c+j} a_{j-k+c} * p_k,
//! a_i = e^{-G} G^i / i!
//! ```
//!
//! The infinite system is closed with a geometric tail `p_j = p_M tau^{-(j-M)}`
//! for `j >= M`, where `tau > 1` is the root of `z^c = e^{G(z-1)}`. The
//! remaining `M + 1` unknowns are solved as one dense linear system.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default relative tolerance on the waiting time when choosing `M`.
pub const DEFAULT_REL_TOL: f64 = 1e-8;
/// Absolute floor on the change in mean queue length when choosing `M`.
pub const DEFAULT_ABS_TOL: f64 = 1e-12;
/// Largest truncation state the doubling schedule may reach.
pub const DEFAULT_TRUNCATION_CAP: usize = 4096;
/// Smallest starting point of the doubling schedule.
const MIN_START_TRUNCATION: usize = 16;
/// Round-off band below zero that is clamped instead of rejected.
const NEGATIVE_CLAMP: f64 = 1e-12;
/// Relative bracket width at which the root iteration stops.
const ROOT_TOL: f64 = 1e-14;

/// Poisson arrivals, deterministic service, `servers` parallel servers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueSpec {
    arrival_rate: f64,
    service_time: f64,
    servers: u32,
}

impl QueueSpec {
    pub fn new(arrival_rate: f64, service_time: f64, servers: u32) -> Result<Self> {
        if !(arrival_rate.is_finite() && arrival_rate >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "arrival_rate",
                reason: format!("must be finite and >= 0, got {arrival_rate}"),
            });
        }
        if !(service_time.is_finite() && service_time > 0.0) {
            return Err(Error::InvalidParameter {
                name: "service_time",
                reason: format!("must be finite and > 0, got {service_time}"),
            });
        }
        if servers == 0 {
            return Err(Error::InvalidParameter {
                name: "servers",
                reason: "must be >= 1".into(),
            });
        }
        Ok(Self {
            arrival_rate,
            service_time,
            servers,
        })
    }

    pub fn arrival_rate(&self) -> f64 {
        self.arrival_rate
    }

    pub fn service_time(&self) -> f64 {
        self.service_time
    }

    pub fn servers(&self) -> u32 {
        self.servers
    }

    pub fn service_rate(&self) -> f64 {
        1.0 / self.service_time
    }

    /// `G = lambda * D`, the mean number of arrivals during one service.
    pub fn offered_traffic(&self) -> f64 {
        self.arrival_rate * self.service_time
    }

    /// Per-server utilization `G / c`.
    pub fn utilization(&self) -> f64 {
        self.offered_traffic() / f64::from(self.servers)
    }

    pub fn is_stable(&self) -> bool {
        self.offered_traffic() < f64::from(self.servers)
    }

    fn ensure_stable(&self) -> Result<()> {
        if self.is_stable() {
            Ok(())
        } else {
            Err(Error::UnstableQueue {
                offered: self.offered_traffic(),
                servers: self.servers,
            })
        }
    }
}

/// Geometric tail closure: decay root `tau` and truncation state `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailParams {
    /// `tau > 1`; infinite for an empty queue.
    pub decay_root: f64,
    /// `M >= c`.
    pub truncation: usize,
}

impl TailParams {
    /// `|c ln tau - G (tau - 1)|`, the root residual measured in log space.
    ///
    /// This is the relative form of `|tau^c - e^{G(tau-1)}|` and stays
    /// meaningful when `tau^c` is astronomically large at light load.
    pub fn root_residual(&self, spec: &QueueSpec) -> f64 {
        let eps = self.decay_root - 1.0;
        (f64::from(spec.servers) * eps.ln_1p() - spec.offered_traffic() * eps).abs()
    }
}

/// Truncated stationary distribution `p_0..p_M` with its geometric tail.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDistribution {
    spec: QueueSpec,
    tail: TailParams,
    probs: Vec<f64>,
}

impl StateDistribution {
    /// All mass at the empty state; used when nothing arrives.
    fn empty(spec: QueueSpec) -> Self {
        let truncation = spec.servers as usize + 4;
        let mut probs = vec![0.0; truncation + 1];
        probs[0] = 1.0;
        Self {
            spec,
            tail: TailParams {
                decay_root: f64::INFINITY,
                truncation,
            },
            probs,
        }
    }

    pub fn spec(&self) -> &QueueSpec {
        &self.spec
    }

    pub fn tail(&self) -> &TailParams {
        &self.tail
    }

    /// `p_0..=p_M`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `p_j`, extended past `M` with the geometric tail.
    pub fn state_probability(&self, j: usize) -> f64 {
        let m = self.tail.truncation;
        if j <= m {
            return self.probs[j];
        }
        let p_m = self.probs[m];
        if p_m == 0.0 {
            return 0.0;
        }
        p_m * (-((j - m) as f64) * self.tail.decay_root.ln()).exp()
    }

    /// `sum_{j<M} p_j + p_M / (1 - 1/tau)`; equals one for a solved system.
    pub fn normalization_sum(&self) -> f64 {
        let m = self.tail.truncation;
        let head: f64 = self.probs[..m].iter().sum();
        head + self.probs[m] / (1.0 - self.tail.decay_root.recip())
    }

    /// Mean number of frames waiting, in closed form over the geometric tail.
    pub fn mean_queue_length(&self) -> f64 {
        let c = self.spec.servers as usize;
        let m = self.tail.truncation;
        let head: f64 = (c..m).map(|k| self.probs[k] * (k - c) as f64).sum();
        let q = 1.0 - self.tail.decay_root.recip();
        let tail = self.probs[m] * (((m - c) as f64 + 1.0 / q - 1.0) / q);
        head + tail
    }

    /// Mean wait before service, `E[L_q] / lambda` by Little's law.
    pub fn mean_waiting_time(&self) -> Result<f64> {
        if self.spec.arrival_rate == 0.0 {
            return Err(Error::ZeroArrivalRate);
        }
        Ok(self.mean_queue_length() / self.spec.arrival_rate)
    }
}

/// Stopping rule for the truncation doubling schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationRule {
    pub rel_tol: f64,
    /// Absolute floor on the change in mean queue length, in customers.
    /// At light load the queue length sits at round-off level and a pure
    /// relative test never settles.
    pub abs_tol: f64,
    pub hard_cap: usize,
}

impl Default for TruncationRule {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_REL_TOL,
            abs_tol: DEFAULT_ABS_TOL,
            hard_cap: DEFAULT_TRUNCATION_CAP,
        }
    }
}

impl TruncationRule {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

/// Root `tau > 1` of `z^c = e^{G(z-1)}`.
///
/// Solved in `eps = tau - 1` on `c ln(1 + eps) - G eps`, whose ratio to `eps`
/// is strictly decreasing, so the positive root is unique and brackets are
/// found by doubling.
pub fn compute_decay_root(spec: &QueueSpec) -> Result<f64> {
    spec.ensure_stable()?;
    if spec.arrival_rate == 0.0 {
        return Err(Error::ZeroArrivalRate);
    }
    let c = f64::from(spec.servers);
    let g = spec.offered_traffic();
    let f = |eps: f64| c * eps.ln_1p() - g * eps;
    let df = |eps: f64| c / (1.0 + eps) - g;

    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    while f(hi) >= 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NoConvergence {
                what: "decay root bracket",
                detail: format!("no sign change for G = {g}, c = {c}"),
            });
        }
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..500 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(1.0 + x);
        }
        if fx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= ROOT_TOL * hi {
            return Ok(1.0 + 0.5 * (lo + hi));
        }
        let newton = x - fx / df(x);
        x = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        // Newton steps that no longer move are as good as the bracket gets.
        if (x - lo).min(hi - x) <= f64::EPSILON * x && f(x).abs() <= f64::EPSILON * g * x {
            return Ok(1.0 + x);
        }
    }
    Err(Error::NoConvergence {
        what: "decay root",
        detail: format!("bracket [{lo}, {hi}] after 500 iterations"),
    })
}

/// Smallest `M` on the doubling schedule whose waiting time moves by less
/// than `rule.rel_tol` when `M` is doubled.
pub fn select_truncation(spec: &QueueSpec, rule: &TruncationRule) -> Result<usize> {
    solve_stationary(spec, rule).map(|d| d.tail.truncation)
}

/// Selects `M` with `rule` and returns the distribution solved at that `M`.
pub fn solve_stationary(spec: &QueueSpec, rule: &TruncationRule) -> Result<StateDistribution> {
    spec.ensure_stable()?;
    if spec.arrival_rate == 0.0 {
        return Ok(StateDistribution::empty(*spec));
    }
    let decay_root = compute_decay_root(spec)?;
    let c = spec.servers as usize;
    let mut m = (c + 4).max(MIN_START_TRUNCATION);
    if m > rule.hard_cap {
        return Err(Error::NoConvergence {
            what: "truncation schedule",
            detail: format!("starting M = {m} exceeds cap {}", rule.hard_cap),
        });
    }
    let mut current = solve_state_distribution(
        spec,
        &TailParams {
            decay_root,
            truncation: m,
        },
    )?;
    let mut wait = current.mean_queue_length();
    loop {
        let next_m = 2 * m;
        if next_m > rule.hard_cap {
            return Err(Error::NoConvergence {
                what: "truncation schedule",
                detail: format!("waiting time still moving at M = {m} (cap {})", rule.hard_cap),
            });
        }
        let next = solve_state_distribution(
            spec,
            &TailParams {
                decay_root,
                truncation: next_m,
            },
        )?;
        let next_wait = next.mean_queue_length();
        if (next_wait - wait).abs() <= rule.rel_tol * next_wait.abs() + rule.abs_tol {
            return Ok(current);
        }
        m = next_m;
        current = next;
        wait = next_wait;
    }
}

/// Solves the tail-closed balance equations for `p_0..=p_M`.
pub fn solve_state_distribution(spec: &QueueSpec, tail: &TailParams) -> Result<StateDistribution> {
    spec.ensure_stable()?;
    if spec.arrival_rate == 0.0 {
        return Ok(StateDistribution::empty(*spec));
    }
    let c = spec.servers as usize;
    let m = tail.truncation;
    let tau = tail.decay_root;
    if m < c + 1 {
        return Err(Error::InvalidParameter {
            name: "truncation",
            reason: format!("M = {m} must exceed the server count {c}"),
        });
    }
    if !(tau > 1.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "decay_root",
            reason: format!("must be finite and > 1, got {tau}"),
        });
    }

    let weights = poisson_weights(spec.offered_traffic(), m);
    let ln_tau = tau.ln();
    let n = m + 1;
    let mut a = DMatrix::<f64>::zeros(n, n);
    for j in 0..m {
        a[(j, j)] += 1.0;
        for k in 0..=c {
            a[(j, k)] -= weights[j];
        }
        for k in (c + 1)..=(c + j) {
            let coef = weights[j + c - k];
            if k <= m {
                a[(j, k)] -= coef;
            } else {
                a[(j, m)] -= coef * (-((k - m) as f64) * ln_tau).exp();
            }
        }
    }
    for k in 0..m {
        a[(m, k)] = 1.0;
    }
    a[(m, m)] = tau / (tau - 1.0);

    let mut rhs = DVector::<f64>::zeros(n);
    rhs[m] = 1.0;
    let solution = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSystem(format!("LU solve failed for M = {m}, tau = {tau}")))?;

    let mut probs = Vec::with_capacity(n);
    for (j, &p) in solution.iter().enumerate() {
        if !p.is_finite() {
            return Err(Error::SingularSystem(format!("p_{j} is not finite")));
        }
        if p < -NEGATIVE_CLAMP {
            return Err(Error::SingularSystem(format!(
                "p_{j} = {p:e} is negative beyond round-off (M = {m}, tau = {tau})"
            )));
        }
        probs.push(p.max(0.0));
    }
    Ok(StateDistribution {
        spec: *spec,
        tail: *tail,
        probs,
    })
}

/// Exact M/D/1 mean wait `G D / (2 (1 - G))`.
pub fn md1_exact_waiting(spec: &QueueSpec) -> Result<f64> {
    if spec.servers != 1 {
        return Err(Error::NotSingleServer(spec.servers));
    }
    spec.ensure_stable()?;
    let g = spec.offered_traffic();
    Ok(g * spec.service_time / (2.0 * (1.0 - g)))
}

/// `e^{-G} G^i / i!` for `i = 0..=max`, evaluated in log space.
fn poisson_weights(g: f64, max: usize) -> Vec<f64> {
    let ln_g = g.ln();
    let mut ln_fact = 0.0;
    (0..=max)
        .map(|i| {
            if i > 0 {
                ln_fact += (i as f64).ln();
            }
            (-g + i as f64 * ln_g - ln_fact).exp()
        })
        .collect()
}
