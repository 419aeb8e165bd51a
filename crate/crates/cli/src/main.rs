use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hapvec_cli::{
    load_scenario, run_analyze, run_sweep, run_validate, write_rows, write_validate, CliError,
    CliResult, Command, Mode, Param, Preset, SweepSpec, ValidateOptions,
};

/// Offloading analysis for GVs served by a HAP edge server.
#[derive(Parser)]
#[command(name = "hapvec", version)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Args)]
struct Common {
    /// Scenario TOML file; omitted keys take their defaults.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Bundled scenario and sweep grid.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Root seed for simulation runs.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Analytical)]
    mode: Mode,
    /// Frames per simulation run, warmup included.
    #[arg(long, default_value_t = 1_000_000)]
    frames: u64,
}

#[derive(Subcommand)]
enum Commands {
    /// Optimal offloading factor for one scenario.
    Analyze(Common),
    /// One row per value of a swept parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Swept parameter; capacities in GFLOPS, n_UL in Mb.
        #[arg(long, value_enum, requires = "values")]
        param: Option<Param>,
        /// Comma-separated, strictly increasing values.
        #[arg(long, requires = "param")]
        values: Option<String>,
    },
    /// Analytical figures against a simulation run (always simulates).
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.5)]
        eta: f64,
        /// Per-frame trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

fn output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            Box::new(BufWriter::new(file))
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Commands::Analyze(c) => {
            let cfg = load_scenario(c.config.as_deref(), c.preset)?;
            let row = run_analyze(&cfg, c.mode, c.seed, c.frames)?;
            write_rows(output(c.out.as_deref())?, Command::Analyze, c.mode, std::slice::from_ref(&row))?;
            if !row.feasible {
                return Err(CliError::Infeasible("no stable offloading factor".into()));
            }
            Ok(())
        }
        Commands::Sweep { common: c, param, values } => {
            let cfg = load_scenario(c.config.as_deref(), c.preset)?;
            let (param, values) = match (param, values) {
                (Some(p), Some(v)) => (p, SweepSpec::parse_values(&v)?),
                _ => match c.preset {
                    Some(p) => p.sweep(),
                    None => {
                        return Err(CliError::Validation(
                            "sweep needs --param and --values, or a --preset".into(),
                        ))
                    }
                },
            };
            let spec = SweepSpec::new(param, values, c.mode)?;
            let rows = run_sweep(&cfg, &spec, c.seed, c.frames)?;
            write_rows(output(c.out.as_deref())?, Command::Sweep, c.mode, &rows)
        }
        Commands::Validate { common: c, eta, trace } => {
            let cfg = load_scenario(c.config.as_deref(), c.preset)?;
            let opts = ValidateOptions {
                eta,
                frames: c.frames,
                seed: c.seed,
                trace,
            };
            let report = run_validate(&cfg, &opts)?;
            write_validate(output(c.out.as_deref())?, &report)?;
            if !report.passed() {
                eprintln!("warning: some simulated figures fall outside tolerance");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
