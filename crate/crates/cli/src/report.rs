//! Rows written to the CSV outputs.

use std::fmt;

use crate::run::Command;
use crate::sweep::{Mode, Param};

/// One CSV cell. Markers stand in for numbers that do not exist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Flag(bool),
    Unstable,
    Infeasible,
    NotApplicable,
}

impl Cell {
    pub fn from_opt(v: Option<f64>, missing: Cell) -> Cell {
        v.map_or(missing, Cell::Num)
    }

    pub fn num(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            _ => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(v) => write!(f, "{v}"),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Flag(b) => write!(f, "{b}"),
            Cell::Unstable => f.write_str("unstable"),
            Cell::Infeasible => f.write_str("infeasible"),
            Cell::NotApplicable => f.write_str("n/a"),
        }
    }
}

const SWEEP_COLUMNS: [&str; 2] = ["param", "value"];
const BASE_COLUMNS: [&str; 7] = [
    "eta_min",
    "eta_max",
    "eta_star",
    "eta_bl",
    "feasible",
    "local_stable",
    "offload_all_stable",
];
const ANALYTICAL_COLUMNS: [&str; 5] = [
    "p_rt_star",
    "p_rt_bl",
    "p_rt_local",
    "latency_star",
    "latency_local",
];
const SIM_COLUMNS: [&str; 9] = [
    "sim_seed",
    "sim_p_rt",
    "sim_p_rt_se",
    "sim_wq_gv",
    "sim_wq_gv_se",
    "sim_wq_hap",
    "sim_wq_hap_se",
    "sim_latency",
    "sim_latency_se",
];

/// Simulated counterparts at `eta_star`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimColumns {
    pub seed: u64,
    pub p_rt: Cell,
    pub p_rt_se: Cell,
    pub wq_gv: Cell,
    pub wq_gv_se: Cell,
    pub wq_hap: Cell,
    pub wq_hap_se: Cell,
    pub latency: Cell,
    pub latency_se: Cell,
}

impl SimColumns {
    /// All cells carry `marker`, e.g. when there is nothing stable to run.
    pub fn missing(seed: u64, marker: Cell) -> Self {
        Self {
            seed,
            p_rt: marker,
            p_rt_se: marker,
            wq_gv: marker,
            wq_gv_se: marker,
            wq_hap: marker,
            wq_hap_se: marker,
            latency: marker,
            latency_se: marker,
        }
    }

    fn cells(&self) -> [Cell; 9] {
        [
            Cell::Int(self.seed),
            self.p_rt,
            self.p_rt_se,
            self.wq_gv,
            self.wq_gv_se,
            self.wq_hap,
            self.wq_hap_se,
            self.latency,
            self.latency_se,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep: Option<(Param, f64)>,
    pub eta_min: Cell,
    pub eta_max: Cell,
    pub eta_star: Cell,
    pub eta_bl: Cell,
    pub feasible: bool,
    /// GV queue stable with every frame kept local.
    pub local_stable: bool,
    /// HAP queue stable with every frame offloaded.
    pub offload_all_stable: bool,
    pub p_rt_star: Cell,
    pub p_rt_bl: Cell,
    pub p_rt_local: Cell,
    pub latency_star: Cell,
    pub latency_local: Cell,
    pub sim: Option<SimColumns>,
}

impl ResultRow {
    pub fn header(command: Command, mode: Mode) -> Vec<&'static str> {
        let mut cols = Vec::new();
        if command == Command::Sweep {
            cols.extend(SWEEP_COLUMNS);
        }
        cols.extend(BASE_COLUMNS);
        if mode.analytical() {
            cols.extend(ANALYTICAL_COLUMNS);
        }
        if mode.simulate() {
            cols.extend(SIM_COLUMNS);
        }
        cols
    }

    pub fn record(&self, command: Command, mode: Mode) -> Vec<String> {
        let mut out = Vec::new();
        if command == Command::Sweep {
            let (param, value) = self.sweep.expect("sweep rows carry their parameter");
            out.push(param.name().to_string());
            out.push(Cell::Num(value).to_string());
        }
        let base = [
            self.eta_min,
            self.eta_max,
            self.eta_star,
            self.eta_bl,
            Cell::Flag(self.feasible),
            Cell::Flag(self.local_stable),
            Cell::Flag(self.offload_all_stable),
        ];
        out.extend(base.iter().map(Cell::to_string));
        if mode.analytical() {
            let cells = [
                self.p_rt_star,
                self.p_rt_bl,
                self.p_rt_local,
                self.latency_star,
                self.latency_local,
            ];
            out.extend(cells.iter().map(Cell::to_string));
        }
        if mode.simulate() {
            let sim = self.sim.expect("simulated rows carry simulation columns");
            out.extend(sim.cells().iter().map(Cell::to_string));
        }
        out
    }
}

/// One metric of a `validate` run.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidateRow {
    pub metric: &'static str,
    pub analytical: Cell,
    pub simulated: Cell,
    pub std_error: Cell,
    pub abs_diff: Cell,
    pub tolerance: Cell,
    /// `Flag` or `NotApplicable`.
    pub pass: Cell,
}

impl ValidateRow {
    pub const HEADER: [&'static str; 7] = [
        "metric",
        "analytical",
        "simulated",
        "std_error",
        "abs_diff",
        "tolerance",
        "pass",
    ];

    pub fn not_applicable(metric: &'static str) -> Self {
        let na = Cell::NotApplicable;
        Self {
            metric,
            analytical: na,
            simulated: na,
            std_error: na,
            abs_diff: na,
            tolerance: na,
            pass: na,
        }
    }

    pub fn record(&self) -> Vec<String> {
        let mut out = vec![self.metric.to_string()];
        let cells = [
            self.analytical,
            self.simulated,
            self.std_error,
            self.abs_diff,
            self.tolerance,
            self.pass,
        ];
        out.extend(cells.iter().map(Cell::to_string));
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateReport {
    pub eta: f64,
    pub frames: u64,
    pub seed: u64,
    pub rows: Vec<ValidateRow>,
}

impl ValidateReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Cell::Flag(false))
    }

    pub fn row(&self, metric: &str) -> Option<&ValidateRow> {
        self.rows.iter().find(|r| r.metric == metric)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn markers_render_as_words() {
        assert_eq!(Cell::Unstable.to_string(), "unstable");
        assert_eq!(Cell::Infeasible.to_string(), "infeasible");
        assert_eq!(Cell::NotApplicable.to_string(), "n/a");
        assert_eq!(Cell::Num(0.25).to_string(), "0.25");
        assert_eq!(Cell::Flag(true).to_string(), "true");
    }

    #[test]
    fn header_depends_on_command_and_mode() {
        let a = ResultRow::header(Command::Analyze, Mode::Analytical);
        let b = ResultRow::header(Command::Sweep, Mode::Both);
        assert_eq!(a.len(), 12);
        assert_eq!(b.len(), 2 + 7 + 5 + 9);
        assert_eq!(ResultRow::header(Command::Analyze, Mode::Simulate).len(), 16);
        assert!(!a.contains(&"sim_p_rt"));
    }
}
