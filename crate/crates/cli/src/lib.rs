//! Library side of the `hapvec` command: scenario loading, sweeps,
//! simulation checks and their CSV layout.

pub mod error;
pub mod report;
pub mod run;
pub mod sweep;

pub use error::{CliError, CliResult};
pub use report::{Cell, ResultRow, SimColumns, ValidateReport, ValidateRow};
pub use run::{
    load_scenario, run_analyze, run_sweep, run_validate, write_rows, write_validate, Command,
    ValidateOptions,
};
pub use sweep::{Mode, Param, Preset, SweepSpec};
