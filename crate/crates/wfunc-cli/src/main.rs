//! `wfunc`: w-functions, interval bounds and dispatching policies for
//! M/G/1-FCFS queues.
//!
//! Exit codes: 0 success, 2 config error, 3 stability violation,
//! 4 divergent series, 1 other failures.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use wfunc_cli::commands;
use wfunc_cli::config::{GridConfig, RunConfig};
use wfunc_cli::output::{self, Format};
use wfunc_cli::verify;
use wfunc_core::WfError;

#[derive(Parser)]
#[command(name = "wfunc", version, about = "M/G/1 value functions, interval bounds and dispatching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Path to the JSON config document.
    #[arg(long)]
    config: PathBuf,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Evaluation grid "min:max:steps" (overrides the config grid).
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact w-function, derivative and relative value on a grid.
    Wfn {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Interval bounds [w^(n)] over a range of Taylor orders.
    Bounds {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Filtered w'-germ coefficients (or the divergence witness).
    Taylor {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Uniform cost approximation coefficients and error bounds.
    Approx {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Dispatching policy map over a backlog grid.
    Policy {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Monte-Carlo discharge-cost estimates.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// RNG seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Replication count (overrides the config).
        #[arg(long)]
        reps: Option<u64>,
    },
    /// Run the full acceptance suite and report pass/fail per criterion.
    Verify,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(classify_error(&e))
        }
    }
}

fn classify_error(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(wf) = cause.downcast_ref::<WfError>() {
            return match wf {
                WfError::StabilityViolation { .. } => 3,
                WfError::DivergentSeries { .. } => 4,
                _ => 2,
            };
        }
    }
    // Everything else surfaces as a config/usage problem.
    2
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Wfn { common } => emit(&common, commands::cmd_wfn),
        Command::Bounds { common } => emit(&common, commands::cmd_bounds),
        Command::Taylor { common } => emit(&common, |cfg, _| commands::cmd_taylor(cfg)),
        Command::Approx { common } => emit(&common, |cfg, _| commands::cmd_approx(cfg)),
        Command::Policy { common } => emit(&common, commands::cmd_policy),
        Command::Simulate { common, seed, reps } => {
            emit(&common, move |cfg, _| commands::cmd_simulate(cfg, seed, reps))
        }
        Command::Verify => {
            let bin = std::env::current_exe()?;
            let outcomes = verify::run_all(&bin);
            let mut all_pass = true;
            for o in &outcomes {
                let status = if o.pass { "PASS" } else { "FAIL" };
                println!(
                    "[{status}] criterion {:>2}: {} ({:.1}s) - {}",
                    o.id, o.name, o.secs, o.detail
                );
                all_pass &= o.pass;
            }
            Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}

fn emit(
    common: &CommonArgs,
    f: impl FnOnce(&RunConfig, Option<GridConfig>) -> Result<output::Table>,
) -> Result<ExitCode> {
    let cfg = RunConfig::from_path(&common.config)?;
    let grid = common.grid.as_deref().map(GridConfig::parse).transpose()?;
    let table = f(&cfg, grid)?;
    table.write(&common.out, common.format)?;
    Ok(ExitCode::SUCCESS)
}
