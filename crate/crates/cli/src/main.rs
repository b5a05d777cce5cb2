//! `starheat` command-line driver.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for numerical
//! failures. CSV data goes to the output file, the summary line to standard
//! output and logs to standard error.

mod commands;
mod config;

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use starheat::Execution;

use config::RunConfig;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numeric(String),
}

impl From<starheat::Error> for Failure {
    fn from(e: starheat::Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "starheat", version, about = "Heat kernel experiments on metric star graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// CSV output path (overrides "output" in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Relative tolerance for the adaptive quadrature.
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    /// Seed for the random-walk oracle.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Evaluate on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Kernel values and derivatives over point and time grids.
    Kernel,
    /// Li-Yau report over a point and time grid.
    LiyauScan,
    /// Harnack ratio against the assembled lower bound.
    Harnack,
    /// Crank-Nicolson reference solution.
    OracleFd,
    /// Random-walk terminal positions and histogram comparison.
    OracleWalk,
    /// Pipeline against the closed-form examples.
    Examples,
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let path = cli.config.as_ref().ok_or_else(|| Failure::Config("--config is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(tol) = cli.rel_tol {
        cfg.quadrature = cfg.quadrature.with_rel_tol(tol);
        cfg.quadrature.validate()?;
    }
    let out_path = cli
        .out
        .clone()
        .or_else(|| cfg.output.clone().map(PathBuf::from))
        .ok_or_else(|| Failure::Config("no output path: pass --out or set \"output\"".into()))?;
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    // Build the rows before touching the output file so failed runs leave nothing behind.
    let mut buf = Vec::new();
    let summary = match cli.command {
        Command::Kernel => commands::kernel_cmd(&cfg, exec, &mut buf),
        Command::LiyauScan => commands::liyau_scan_cmd(&cfg, exec, &mut buf),
        Command::Harnack => commands::harnack_cmd(&cfg, exec, &mut buf),
        Command::OracleFd => commands::oracle_fd_cmd(&cfg, &mut buf),
        Command::OracleWalk => commands::oracle_walk_cmd(&cfg, exec, cli.seed, &mut buf),
        Command::Examples => commands::examples_cmd(&cfg, &mut buf),
    }?;
    let mut file = File::create(&out_path)
        .map_err(|e| Failure::Config(format!("cannot create {}: {e}", out_path.display())))?;
    file.write_all(&buf)
        .map_err(|e| Failure::Numeric(format!("cannot write {}: {e}", out_path.display())))?;
    log::info!("wrote {}", out_path.display());
    Ok(summary)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
