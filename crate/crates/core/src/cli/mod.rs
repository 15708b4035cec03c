//! Experiment driver behind the `rminmax` binary.
//!
//! Exit codes: 0 success, 1 failed check, 2 configuration or input error,
//! 3 numeric failure during a run.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{
    cmd_check, cmd_compare, cmd_run, cmd_sweep, execute, iterations_for_budget, Axis, CompareSeed, CompareSummary,
    ConstantsSource, RunSummary, SweepRow, SweepSummary,
};
pub use config::{build_problem, CompareSpec, ExperimentConfig, ProblemSpec, SyntheticData, CONFIG_VERSION};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Exit code for an error: 3 for numeric failures, 2 for everything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numeric(_) => EXIT_NUMERIC,
        _ => EXIT_CONFIG,
    }
}

#[derive(Debug, Parser)]
#[command(name = "rminmax", version, about = "Riemannian min-max solvers and diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the verification suite.
    Check {
        /// Only groups whose name contains this string.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON report path.
        #[arg(long, default_value = "check_report.json")]
        report: PathBuf,
    },
    /// Run one experiment; writes trace.csv and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one hyperparameter over values and seeds.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        axis: Axis,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Equal-budget comparison of the solvers under `compare`.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Total stochastic gradient evaluations per solver.
        #[arg(long)]
        budget: u64,
        /// Overrides `compare.seeds`.
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Check { filter, seed, report } => {
            let reports = cmd_check(filter.as_deref(), seed, &report)?;
            for r in &reports {
                println!("{}", r.line());
            }
            let failed = reports.iter().filter(|r| !r.pass).count();
            println!("{} checks, {} failed", reports.len(), failed);
            Ok(if failed == 0 { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Command::Run { config, out } => {
            let s = cmd_run(&config, out.as_deref())?;
            println!(
                "{} on {}: zeta={} |grad Phi(x_zeta)|={:.6e} averaged={} samples={}",
                s.algorithm,
                s.problem,
                s.zeta,
                s.output_stationarity,
                s.averaged_stationarity.map_or("n/a".into(), |v| format!("{v:.6e}")),
                s.samples
            );
            Ok(EXIT_OK)
        }
        Command::Sweep { config, axis, values, seeds, out } => {
            let s = cmd_sweep(&config, axis, &values, seeds, out.as_deref())?;
            for r in &s.rows {
                println!(
                    "{:?}={} seed={} averaged={:.6e} samples={}",
                    axis, r.value, r.seed, r.averaged_stationarity, r.samples
                );
            }
            if let Some(fit) = &s.rate {
                println!("rate slope {:.4} (band {:.4}..{:.4})", fit.slope, fit.band.0, fit.band.1);
            }
            Ok(EXIT_OK)
        }
        Command::Compare { config, budget, seeds, out } => {
            let s = cmd_compare(&config, budget, seeds, out.as_deref())?;
            println!("seed  {}", s.solvers.join("  "));
            for r in &s.per_seed {
                let vals: Vec<String> = r.averaged_stationarity.iter().map(|v| format!("{v:.4e}")).collect();
                println!("{:<5} {}  -> {}", r.seed, vals.join("  "), r.winner);
            }
            for (label, m) in &s.medians {
                println!("median {label}: {m:.4e} ({} wins)", s.wins[label]);
            }
            println!("winner: {}", s.winner);
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
