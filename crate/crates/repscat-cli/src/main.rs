//! `repscat`: batch runs, audits and reports for the scattering toolkit.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid configuration,
//! 3 a numerical check or audit row failed (outputs are still written).

mod audit;
mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{RunConfig, Tolerances};
use crate::error::CliError;
use crate::output::OutDir;

#[derive(Parser, Debug)]
#[command(name = "repscat", version, about = "Stationary scattering for repulsive Schrödinger operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir` in the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Size of the worker pool (defaults to the number of cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// TOML file overriding acceptance tolerances.
    #[arg(long, global = true)]
    tol_overrides: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Limiting resolvent of the configured source, with Parseval check.
    Solve,
    /// S(λ) sweep with unitarity defects and oracle differences.
    Smatrix,
    /// Generalized eigenfunctions and their asymptotic data.
    Eigenfun,
    /// Pass/fail table over the identity suite.
    Audit,
    /// LAP quotients and Hölder continuity over the λ list.
    Sweep,
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Validation("--config PATH is required".into()))?;
    let cfg = RunConfig::load(path)?;
    let tol = Tolerances::load(cli.tol_overrides.as_deref())?;
    if cli.workers == Some(0) {
        return Err(CliError::Validation("--workers must be at least 1".into()));
    }
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("repscat-out"));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let mut out = OutDir::create(&dir)?;
    let result = pool.install(|| match cli.command {
        Command::Solve => commands::cmd_solve(&cfg, &tol, &mut out),
        Command::Smatrix => commands::cmd_smatrix(&cfg, &tol, &mut out),
        Command::Eigenfun => commands::cmd_eigenfun(&cfg, &tol, &mut out),
        Command::Audit => audit::cmd_audit(&cfg, &tol, &mut out),
        Command::Sweep => commands::cmd_sweep(&cfg, &tol, &mut out),
    });
    for p in out.written() {
        eprintln!("wrote {}", p.display());
    }
    result.map(|_| out.written().to_vec())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("repscat: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
