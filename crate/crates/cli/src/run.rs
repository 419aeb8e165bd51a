//! The three commands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use hapvec::latency::{avg_latency, gv_delay, hap_delay, residual_mass};
use hapvec::optimizer::baseline_factor;
use hapvec::sim::{simulate_system_traced, Estimate, FrameRecord, SimConfig};
use hapvec::{evaluate_at, optimize, parse_config, simulate_system, Error, ScenarioConfig};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::report::{Cell, ResultRow, SimColumns, ValidateReport, ValidateRow};
use crate::sweep::{Mode, Preset, SweepSpec};

/// Deadline-probability tolerance.
pub const P_RT_TOL: f64 = 0.01;
/// Used instead when the partial-service term of the deadline model is
/// itself larger than `P_RT_TOL`.
pub const P_RT_RELAXED_TOL: f64 = 0.03;
/// Relative tolerance on waits and latencies.
pub const DELAY_REL_TOL: f64 = 0.02;
/// Standard errors always allowed on waits and latencies.
pub const DELAY_SE_MULTIPLE: f64 = 3.0;
/// Absolute floor on the wait and latency tolerance, s.
pub const DELAY_ABS_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Sweep,
    Validate,
}

/// Scenario from a file, a preset, or the defaults when neither is given.
pub fn load_scenario(config: Option<&Path>, preset: Option<Preset>) -> CliResult<ScenarioConfig> {
    match (config, preset) {
        (Some(_), Some(_)) => Err(CliError::Validation(
            "--config and --preset are mutually exclusive".into(),
        )),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Ok(parse_config(&text)?)
        }
        (None, Some(p)) => Ok(p.scenario()),
        (None, None) => Ok(ScenarioConfig::default()),
    }
}

fn estimate_cells(e: Estimate) -> (Cell, Cell) {
    (Cell::Num(e.mean), Cell::Num(e.std_error))
}

fn simulate_at(cfg: &ScenarioConfig, eta: f64, frames: u64, seed: u64) -> CliResult<SimColumns> {
    let stats = simulate_system(&SimConfig::new(cfg.clone(), eta, frames, seed))?;
    let na = (Cell::NotApplicable, Cell::NotApplicable);
    let (p_rt, p_rt_se) = estimate_cells(stats.deadline_hit);
    let (wq_gv, wq_gv_se) = stats.gv.as_ref().map_or(na, |g| estimate_cells(g.queue.wait));
    let (wq_hap, wq_hap_se) = stats.hap.as_ref().map_or(na, |h| estimate_cells(h.queue.wait));
    let (latency, latency_se) = estimate_cells(stats.latency);
    Ok(SimColumns {
        seed,
        p_rt,
        p_rt_se,
        wq_gv,
        wq_gv_se,
        wq_hap,
        wq_hap_se,
        latency,
        latency_se,
    })
}

fn analyze_row(
    cfg: &ScenarioConfig,
    sweep: Option<(crate::Param, f64)>,
    mode: Mode,
    seed: u64,
    frames: u64,
) -> CliResult<ResultRow> {
    let local = evaluate_at(cfg, 0.0)?;
    let all = evaluate_at(cfg, 1.0)?;
    let eta_bl = baseline_factor(cfg);
    let bl = evaluate_at(cfg, eta_bl)?;
    let opt = match optimize(cfg) {
        Ok(o) => Some(o),
        Err(Error::InfeasibleScenario(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let inf = Cell::Infeasible;
    let mut row = ResultRow {
        sweep,
        eta_min: opt.as_ref().map_or(inf, |o| Cell::Num(o.range.eta_min)),
        eta_max: opt.as_ref().map_or(inf, |o| Cell::Num(o.range.eta_max)),
        eta_star: opt.as_ref().map_or(inf, |o| Cell::Num(o.eta_star)),
        eta_bl: Cell::Num(eta_bl),
        feasible: opt.is_some(),
        local_stable: local.gv_stable,
        offload_all_stable: all.hap_stable,
        p_rt_star: opt.as_ref().map_or(inf, |o| Cell::Num(o.p_rt_at_star)),
        p_rt_bl: Cell::from_opt(bl.p_rt, Cell::Unstable),
        p_rt_local: Cell::from_opt(local.p_rt, Cell::Unstable),
        latency_star: opt.as_ref().map_or(inf, |o| Cell::Num(o.avg_latency_at_star)),
        latency_local: Cell::from_opt(local.avg_latency, Cell::Unstable),
        sim: None,
    };
    if mode.simulate() {
        row.sim = Some(match &opt {
            Some(o) => simulate_at(cfg, o.eta_star, frames, seed)?,
            None => SimColumns::missing(seed, inf),
        });
    }
    Ok(row)
}

/// Optimum, baseline and fully-local figures for one scenario.
///
/// An infeasible scenario still yields a row, with markers in place of the
/// optimum.
pub fn run_analyze(cfg: &ScenarioConfig, mode: Mode, seed: u64, frames: u64) -> CliResult<ResultRow> {
    analyze_row(cfg, None, mode, seed, frames)
}

/// One row per sweep value, in value order. Row `i` simulates with seed
/// `seed + i`.
pub fn run_sweep(cfg: &ScenarioConfig, spec: &SweepSpec, seed: u64, frames: u64) -> CliResult<Vec<ResultRow>> {
    let configs = spec
        .values
        .iter()
        .map(|&v| spec.param.apply(cfg, v))
        .collect::<CliResult<Vec<_>>>()?;
    configs
        .par_iter()
        .zip(&spec.values)
        .enumerate()
        .map(|(i, (c, &v))| analyze_row(c, Some((spec.param, v)), spec.mode, seed.wrapping_add(i as u64), frames))
        .collect()
}

pub fn write_rows<W: Write>(out: W, command: Command, mode: Mode, rows: &[ResultRow]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ResultRow::header(command, mode))?;
    for row in rows {
        w.write_record(row.record(command, mode))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateOptions {
    pub eta: f64,
    pub frames: u64,
    pub seed: u64,
    /// Per-frame trace output.
    pub trace: Option<PathBuf>,
}

fn delay_row(metric: &'static str, analytical: f64, sim: Estimate) -> ValidateRow {
    let diff = (sim.mean - analytical).abs();
    let tol = (DELAY_REL_TOL * analytical.abs())
        .max(DELAY_SE_MULTIPLE * sim.std_error)
        .max(DELAY_ABS_FLOOR);
    ValidateRow {
        metric,
        analytical: Cell::Num(analytical),
        simulated: Cell::Num(sim.mean),
        std_error: Cell::Num(sim.std_error),
        abs_diff: Cell::Num(diff),
        tolerance: Cell::Num(tol),
        pass: Cell::Flag(diff <= tol),
    }
}

/// Analytical figures side by side with one simulation run at `eta`.
pub fn run_validate(cfg: &ScenarioConfig, opts: &ValidateOptions) -> CliResult<ValidateReport> {
    let eta = opts.eta;
    let eval = evaluate_at(cfg, eta)?;
    let Some(p_rt) = eval.p_rt else {
        return Err(CliError::Validation(format!(
            "scenario is unstable at eta = {eta}; nothing to validate"
        )));
    };
    let t_max = cfg.deadline();
    let residual = residual_mass(eta, cfg, t_max)?;
    let sim = SimConfig::new(cfg.clone(), eta, opts.frames, opts.seed);
    sim.validate()?;

    let stats = match &opts.trace {
        None => simulate_system(&sim)?,
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let mut w = csv::Writer::from_writer(BufWriter::new(file));
            w.write_record(["frame_id", "path", "gen_time", "end_time", "met_deadline"])?;
            let mut failure = None;
            let stats = simulate_system_traced(&sim, |r: &FrameRecord| {
                if failure.is_none() {
                    let rec = [
                        r.frame_id.to_string(),
                        r.path.as_str().to_string(),
                        r.gen_time.to_string(),
                        r.end_time.to_string(),
                        r.met_deadline.to_string(),
                    ];
                    if let Err(e) = w.write_record(&rec) {
                        failure = Some(e);
                    }
                }
            })?;
            if let Some(e) = failure {
                return Err(e.into());
            }
            w.flush()?;
            stats
        }
    };

    let mut rows = Vec::new();
    let diff = (stats.deadline_hit.mean - p_rt).abs();
    let tol = if residual > P_RT_TOL { P_RT_RELAXED_TOL } else { P_RT_TOL };
    rows.push(ValidateRow {
        metric: "p_rt",
        analytical: Cell::Num(p_rt),
        simulated: Cell::Num(stats.deadline_hit.mean),
        std_error: Cell::Num(stats.deadline_hit.std_error),
        abs_diff: Cell::Num(diff),
        tolerance: Cell::Num(tol),
        pass: Cell::Flag(diff <= tol),
    });
    rows.push(match &stats.gv {
        Some(gv) => delay_row("wq_gv", gv_delay(eta, cfg)?.wait, gv.queue.wait),
        None => ValidateRow::not_applicable("wq_gv"),
    });
    rows.push(match &stats.hap {
        Some(hap) => delay_row("wq_hap", hap_delay(eta, cfg)?.wait, hap.queue.wait),
        None => ValidateRow::not_applicable("wq_hap"),
    });
    rows.push(delay_row("mean_latency", avg_latency(eta, cfg)?, stats.latency));
    Ok(ValidateReport {
        eta,
        frames: opts.frames,
        seed: opts.seed,
        rows,
    })
}

pub fn write_validate<W: Write>(out: W, report: &ValidateReport) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ValidateRow::HEADER)?;
    for row in &report.rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}
