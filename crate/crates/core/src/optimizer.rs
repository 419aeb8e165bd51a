//! Choice of the shared offloading factor.
//!
//! `P_RT(eta)` is maximized over the stability interval: a uniform coarse
//! grid picks the best bracket and Brent's parabolic/golden-section search
//! refines inside it.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::latency::{analyze_gv_path, analyze_hap_path};
use crate::scenario::ScenarioConfig;

/// Inward shrink applied to an interval end where a stability constraint is tight.
pub const STABILITY_MARGIN: f64 = 1e-6;
/// Coarse grid size before refinement.
pub const COARSE_GRID: usize = 64;
/// Refinement tolerance in `eta`.
pub const ETA_TOL: f64 = 1e-6;
/// Probabilities closer than this are treated as ties.
pub const TIE_TOL: f64 = 1e-9;

/// Stable offloading factors `[eta_min, eta_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibleRange {
    pub eta_min: f64,
    pub eta_max: f64,
    /// `max(0, 1 - C_GV / (r C))` before any shrink.
    pub raw_min: f64,
    /// `min(1, c C_HAP / (r n C))` before any shrink.
    pub raw_max: f64,
}

impl FeasibleRange {
    pub fn is_empty(&self) -> bool {
        self.eta_min > self.eta_max
    }

    pub fn contains(&self, eta: f64) -> bool {
        eta >= self.eta_min && eta <= self.eta_max
    }

    /// `points` evenly spaced values covering the interval, ends included.
    pub fn grid(&self, points: usize) -> Vec<f64> {
        if points <= 1 || self.eta_max == self.eta_min {
            return vec![self.eta_min];
        }
        let step = (self.eta_max - self.eta_min) / (points - 1) as f64;
        (0..points)
            .map(|i| {
                if i == points - 1 {
                    self.eta_max
                } else {
                    self.eta_min + step * i as f64
                }
            })
            .collect()
    }
}

/// Interval of `eta` keeping both queues stable, or `InfeasibleScenario`.
pub fn feasible_range(cfg: &ScenarioConfig) -> Result<FeasibleRange> {
    let local_demand = cfg.frame_rate * cfg.compute.frame_load;
    let hap_demand = local_demand * f64::from(cfg.gv_count);
    let hap_supply = f64::from(cfg.compute.hap_servers) * cfg.compute.hap_capacity;

    let min_expr = 1.0 - cfg.compute.gv_capacity / local_demand;
    let max_expr = hap_supply / hap_demand;
    let raw_min = min_expr.max(0.0);
    let raw_max = max_expr.min(1.0);
    // G_GV(raw_min) = 1 or G_HAP(raw_max) = c means the end is not stable.
    let eta_min = if min_expr >= 0.0 {
        raw_min + STABILITY_MARGIN
    } else {
        raw_min
    };
    let eta_max = if max_expr <= 1.0 {
        raw_max - STABILITY_MARGIN
    } else {
        raw_max
    };
    let range = FeasibleRange {
        eta_min,
        eta_max,
        raw_min,
        raw_max,
    };
    if range.is_empty() {
        return Err(Error::InfeasibleScenario(format!(
            "no stable offloading factor: need eta >= {raw_min:.6} for the GVs \
             but eta <= {raw_max:.6} for the HAP"
        )));
    }
    Ok(range)
}

/// Load-balancing factor with equal per-server utilization at both ends.
pub fn baseline_factor(cfg: &ScenarioConfig) -> f64 {
    let hap_capacity = f64::from(cfg.compute.hap_servers) * cfg.compute.hap_capacity;
    1.0 / (f64::from(cfg.gv_count) * cfg.compute.gv_capacity / hap_capacity + 1.0)
}

/// Metrics at one offloading factor. Instability is reported, not raised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub eta: f64,
    pub gv_stable: bool,
    pub hap_stable: bool,
    /// `P_RT(eta)`; `None` if either queue is unstable.
    pub p_rt: Option<f64>,
    /// Average latency; `None` if either queue is unstable.
    pub avg_latency: Option<f64>,
    /// Per-path deadline probabilities, `None` for a path that carries no frames.
    pub p_gv: Option<f64>,
    pub p_hap: Option<f64>,
    /// Per-path mean delays.
    pub t_gv: Option<f64>,
    pub t_hap: Option<f64>,
}

impl Evaluation {
    pub fn is_stable(&self) -> bool {
        self.gv_stable && self.hap_stable
    }
}

/// Evaluates `P_RT` and average latency at `eta` with the scenario deadline.
pub fn evaluate_at(cfg: &ScenarioConfig, eta: f64) -> Result<Evaluation> {
    evaluate_with_deadline(cfg, eta, cfg.deadline())
}

pub fn evaluate_with_deadline(cfg: &ScenarioConfig, eta: f64, t_max: f64) -> Result<Evaluation> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter {
            name: "eta",
            reason: format!("must lie in [0, 1], got {eta}"),
        });
    }
    let uses_gv = eta < 1.0;
    let uses_hap = eta > 0.0;
    let gv_stable = !uses_gv || cfg.gv_offered_traffic(eta) < 1.0;
    let hap_stable = !uses_hap || cfg.hap_offered_traffic(eta) < f64::from(cfg.compute.hap_servers);
    let mut out = Evaluation {
        eta,
        gv_stable,
        hap_stable,
        p_rt: None,
        avg_latency: None,
        p_gv: None,
        p_hap: None,
        t_gv: None,
        t_hap: None,
    };
    if !(gv_stable && hap_stable) {
        return Ok(out);
    }
    let (mut p_rt, mut latency) = (0.0, 0.0);
    if uses_gv {
        let gv = analyze_gv_path(eta, cfg, t_max)?;
        p_rt += (1.0 - eta) * gv.deadline_prob;
        latency += (1.0 - eta) * gv.delay.total;
        out.p_gv = Some(gv.deadline_prob);
        out.t_gv = Some(gv.delay.total);
    }
    if uses_hap {
        let hap = analyze_hap_path(eta, cfg, t_max)?;
        p_rt += eta * hap.deadline_prob;
        latency += eta * hap.delay.total;
        out.p_hap = Some(hap.deadline_prob);
        out.t_hap = Some(hap.delay.total);
    }
    out.p_rt = Some(p_rt);
    out.avg_latency = Some(latency);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Diagnostics {
    pub grid_points: usize,
    pub refine_iterations: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub eta_star: f64,
    pub p_rt_at_star: f64,
    pub avg_latency_at_star: f64,
    pub range: FeasibleRange,
    pub eta_baseline: f64,
    /// Evaluation at the baseline factor; may be unstable.
    pub baseline: Evaluation,
    pub at_star: Evaluation,
    pub diagnostics: Diagnostics,
}

fn p_rt_stable(cfg: &ScenarioConfig, eta: f64) -> Result<f64> {
    let e = evaluate_at(cfg, eta)?;
    e.p_rt.ok_or_else(|| {
        Error::InfeasibleScenario(format!("eta = {eta} left the stable interval"))
    })
}

/// Maximizes `P_RT` over the stable interval.
///
/// Among coarse-grid points within `TIE_TOL` of the best the smallest `eta`
/// wins; the refined point replaces it only when it is better by more than
/// `TIE_TOL`.
pub fn optimize(cfg: &ScenarioConfig) -> Result<OptimizationResult> {
    let range = feasible_range(cfg)?;
    let grid = range.grid(COARSE_GRID);
    let values = grid
        .par_iter()
        .map(|&eta| p_rt_stable(cfg, eta))
        .collect::<Result<Vec<_>>>()?;
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let idx = values
        .iter()
        .position(|&v| v >= best - TIE_TOL)
        .expect("grid is non-empty");
    let mut eta_star = grid[idx];
    let mut p_star = values[idx];
    let mut diagnostics = Diagnostics {
        grid_points: grid.len(),
        refine_iterations: 0,
        evaluations: grid.len(),
    };

    if grid.len() > 2 {
        let lo = grid[idx.saturating_sub(1)];
        let hi = grid[(idx + 1).min(grid.len() - 1)];
        let mut failure = None;
        let refined = brent_maximize(
            |eta| match p_rt_stable(cfg, eta) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NEG_INFINITY
                }
            },
            lo,
            hi,
            ETA_TOL,
            200,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        diagnostics.refine_iterations = refined.iterations;
        diagnostics.evaluations += refined.evaluations;
        if refined.value > p_star + TIE_TOL {
            eta_star = refined.x;
            p_star = refined.value;
        }
    }

    let at_star = evaluate_at(cfg, eta_star)?;
    let eta_baseline = baseline_factor(cfg);
    let baseline = evaluate_at(cfg, eta_baseline)?;
    Ok(OptimizationResult {
        eta_star,
        p_rt_at_star: p_star,
        avg_latency_at_star: at_star.avg_latency.expect("eta_star is stable"),
        range,
        eta_baseline,
        baseline,
        at_star,
        diagnostics,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrentMax {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

/// Brent's derivative-free maximization of `f` on `[a, b]`.
pub fn brent_maximize<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_iter: usize,
) -> BrentMax {
    const GOLDEN: f64 = 0.381_966_011_250_105_2;
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let mut neg = |x: f64| -f(x);

    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = neg(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut evaluations = 1;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    let mut iterations = 0;

    while iterations < max_iter {
        let mid = 0.5 * (a + b);
        let tol1 = f64::EPSILON.sqrt() * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - mid).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        iterations += 1;

        let mut golden = true;
        if e.abs() > tol1 {
            // Parabola through x, w, v.
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if mid >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= mid { a - x } else { b - x };
            d = GOLDEN * e;
        }

        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = neg(u);
        evaluations += 1;

        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }

    BrentMax {
        x,
        value: -fx,
        iterations,
        evaluations,
    }
}
