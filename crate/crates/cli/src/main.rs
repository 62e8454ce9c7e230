//! `hpqrc`: benchmark harness for the hybrid photonic-quantum reservoir
//! toolkit.
//!
//! Subcommands: `generate` (series CSVs), `run` (one model, one manifest),
//! `sweep` (model x dataset x noise x seed grids), `compare` (paired
//! statistics), `report` (plot-data tables).
//!
//! Exit codes: 0 success, 1 validation error (flags, config, pairing),
//! 2 runtime or instability error, 3 sweep completed with failed cells.

mod compare;
mod config;
mod generate;
mod manifest;
mod report;
mod run;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::config::{parse_topology, Overrides};
use crate::generate::GenerateArgs;
use crate::manifest::out_root;

#[derive(Debug)]
pub enum CmdError {
    Validation(anyhow::Error),
    Runtime(anyhow::Error),
    Partial(String),
}

pub type CmdResult = Result<(), CmdError>;

#[derive(Parser)]
#[command(name = "hpqrc", version, about = "Hybrid photonic-quantum reservoir benchmark harness")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a chaotic benchmark series as CSV.
    Generate {
        /// `mackey_glass` or `lorenz`.
        dataset: String,
        #[arg(long, default_value_t = 5000)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Mackey-Glass delay (defaults to 17).
        #[arg(long)]
        tau: Option<f64>,
        /// Integrator step (defaults: 0.1 Mackey-Glass, 0.01 Lorenz).
        #[arg(long)]
        dt: Option<f64>,
        /// Gaussian noise level in normalized units.
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        /// Output CSV path (default `<dataset>.csv`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train and evaluate one configured model; writes a run manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output root (default `$HPQRC_OUT_DIR`, then `runs`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override every module seed at once.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the noise level.
        #[arg(long)]
        sigma: Option<f64>,
        /// Override the hybrid topology: `parallel` or `sequential`.
        #[arg(long)]
        topology: Option<String>,
    },
    /// Run a model x dataset x noise x seed grid across worker threads.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output root (default `$HPQRC_OUT_DIR`, then `runs`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker thread count (default: available parallelism).
        #[arg(long)]
        workers: Option<usize>,
        /// Replace the grid's base seeds with this single seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Paired statistics between models over matched run manifests.
    Compare {
        /// Directory of run manifests (e.g. a sweep output root).
        dir: PathBuf,
        /// `candidate,baseline` model pair (default: every pair present).
        #[arg(long)]
        pair: Option<String>,
        /// Where to write compare.csv (default: `dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit plot-ready CSV tables from run manifests.
    Report {
        /// Directory of run manifests.
        dir: PathBuf,
        /// Where to write the tables (default: `dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> CmdResult {
    match cli.cmd {
        Cmd::Generate {
            dataset,
            steps,
            seed,
            tau,
            dt,
            sigma,
            out,
        } => {
            let out = out.unwrap_or_else(|| PathBuf::from(format!("{dataset}.csv")));
            let args = GenerateArgs {
                dataset,
                steps,
                seed,
                tau,
                dt,
                sigma,
            };
            generate::cmd_generate(&args, &out).map_err(|e| {
                // I/O failures are runtime; everything else is argument validation.
                if e.downcast_ref::<hpqrc_core::Error>()
                    .map(|c| matches!(c, hpqrc_core::Error::Io { .. }))
                    .unwrap_or(false)
                {
                    CmdError::Runtime(e)
                } else {
                    CmdError::Validation(e)
                }
            })?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Cmd::Run {
            config,
            out,
            seed,
            sigma,
            topology,
        } => {
            let topology = topology
                .as_deref()
                .map(parse_topology)
                .transpose()
                .map_err(CmdError::Validation)?;
            let ov = Overrides {
                seed,
                sigma,
                topology,
            };
            run::cmd_run(&config, &out_root(out), &ov)
        }
        Cmd::Sweep {
            config,
            out,
            workers,
            seed,
        } => {
            let workers = workers.unwrap_or_else(|| {
                std::thread::available_parallelism().map_or(1, |n| n.get())
            });
            sweep::cmd_sweep(&config, &out_root(out), workers, seed)
        }
        Cmd::Compare { dir, pair, out } => {
            compare::cmd_compare(&dir, pair.as_deref(), out.as_deref())
        }
        Cmd::Report { dir, out } => report::cmd_report(&dir, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            // Help/version go to stdout, usage errors to stderr.
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::Validation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(CmdError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(CmdError::Partial(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(3)
        }
    }
}
