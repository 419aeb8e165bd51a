//! Sweep dimensions and the bundled figure presets.

use clap::ValueEnum;
use hapvec::{parse_config, ScenarioConfig};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Analytical,
    Simulate,
    Both,
}

impl Mode {
    pub fn analytical(self) -> bool {
        matches!(self, Mode::Analytical | Mode::Both)
    }

    pub fn simulate(self) -> bool {
        matches!(self, Mode::Simulate | Mode::Both)
    }
}

/// Swept parameter. Capacities are in GFLOPS and the uplink frame in Mb.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Param {
    #[value(name = "n")]
    N,
    #[value(name = "r")]
    R,
    #[value(name = "C_GV")]
    CGv,
    #[value(name = "C_HAP")]
    CHap,
    #[value(name = "n_UL")]
    NUl,
    #[value(name = "t_max")]
    TMax,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::N => "n",
            Param::R => "r",
            Param::CGv => "C_GV",
            Param::CHap => "C_HAP",
            Param::NUl => "n_UL",
            Param::TMax => "t_max",
        }
    }

    /// Copy of `cfg` with this parameter set to `value`.
    pub fn apply(self, cfg: &ScenarioConfig, value: f64) -> CliResult<ScenarioConfig> {
        let mut out = cfg.clone();
        match self {
            Param::N => {
                if value.fract() != 0.0 || !(1.0..=f64::from(u32::MAX)).contains(&value) {
                    return Err(CliError::Validation(format!("n must be a positive integer, got {value}")));
                }
                out.gv_count = value as u32;
            }
            Param::R => out.frame_rate = value,
            Param::CGv => out.compute.gv_capacity = value * 1e9,
            Param::CHap => out.compute.hap_capacity = value * 1e9,
            Param::NUl => out.radio.uplink.payload_bits = value * 1e6,
            Param::TMax => out.deadline = Some(value),
        }
        out.validate()?;
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: Param,
    pub values: Vec<f64>,
    pub mode: Mode,
}

impl SweepSpec {
    /// Values must be finite, non-empty and strictly increasing.
    pub fn new(param: Param, values: Vec<f64>, mode: Mode) -> CliResult<Self> {
        if values.is_empty() {
            return Err(CliError::Validation("sweep needs at least one value".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Validation("sweep values must be finite".into()));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Validation("sweep values must be strictly increasing".into()));
        }
        Ok(Self { param, values, mode })
    }

    /// Parses a comma-separated list such as `50,90,150`.
    pub fn parse_values(text: &str) -> CliResult<Vec<f64>> {
        text.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Validation(format!("bad sweep value `{}`", s.trim())))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Fig1a,
    Fig1b,
    Fig2a,
}

impl Preset {
    pub fn config_text(self) -> &'static str {
        match self {
            Preset::Fig1a => include_str!("../presets/fig1a.toml"),
            Preset::Fig1b => include_str!("../presets/fig1b.toml"),
            Preset::Fig2a => include_str!("../presets/fig2a.toml"),
        }
    }

    pub fn scenario(self) -> ScenarioConfig {
        parse_config(self.config_text()).expect("bundled preset parses")
    }

    pub fn sweep(self) -> (Param, Vec<f64>) {
        match self {
            Preset::Fig1a => (Param::N, vec![50.0, 90.0, 150.0, 200.0]),
            Preset::Fig1b => (Param::CGv, vec![200.0, 600.0, 800.0, 1000.0]),
            Preset::Fig2a => (Param::R, vec![5.0, 10.0, 15.0, 20.0]),
        }
    }
}
