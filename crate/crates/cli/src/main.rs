//! `lrdspde`: plot-ready densities, covariances, simulations and the
//! convergence, divergence and verification suites.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::{Command, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "lrdspde", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Flat JSON file of settings; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Spectral density in both forms and the covariance, on a λ grid.
    Density,
    /// Limit covariance surfaces (see --mode).
    Covariance,
    /// Field realizations over (t, x) and an ensemble summary.
    Simulate,
    /// R(ε) along the rescaling list.
    Converge,
    /// Growth of the rank-m variance integral with the radius.
    Diverge,
    /// The full acceptance suite; exits nonzero if any check fails.
    Verify,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Density => Command::Density,
            Cmd::Covariance => Command::Covariance,
            Cmd::Simulate => Command::Simulate,
            Cmd::Converge => Command::Converge,
            Cmd::Diverge => Command::Diverge,
            Cmd::Verify => Command::Verify,
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let file = cli.config.as_deref().map(Overrides::from_file).transpose()?;
    let threads = cli.overrides.threads.or(file.as_ref().and_then(|f| f.threads));
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let cfg = RunConfig::resolve(cli.command.into(), cli.overrides, file)?;
    match cfg.command {
        Command::Density => commands::density(&cfg),
        Command::Covariance => commands::covariance(&cfg),
        Command::Simulate => commands::simulate(&cfg),
        Command::Converge => commands::converge(&cfg),
        Command::Diverge => commands::diverge(&cfg),
        Command::Verify => commands::verify(&cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("lrdspde: one or more checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("lrdspde: {e:#}");
            ExitCode::from(2)
        }
    }
}
