//! `hwm`: price high-water-mark variable annuities from the command line.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{cmd_density, cmd_price, cmd_sweep, CliError};
use crate::config::{budget_from_env, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "hwm", version, about = "High-water-mark variable annuity pricer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Price one contract (JSON by default)
    Price(Args),
    /// Contract value against the number of observation dates (CSV)
    Sweep(Args),
    /// Density and distribution function of the running maximum (CSV)
    Density(Args),
}

#[derive(clap::Args)]
struct Args {
    /// JSON config file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: Overrides,
}

impl Args {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => Overrides::from_file(path).map_err(CliError::Validation)?,
            None => Overrides::default(),
        };
        let budget = budget_from_env().map_err(CliError::Validation)?;
        Ok(RunConfig::resolve(file.merge(&self.flags), budget))
    }
}

type Handler = fn(&RunConfig) -> Result<String, CliError>;

fn run(cli: Cli) -> Result<(), CliError> {
    let (args, cmd): (&Args, Handler) = match &cli.command {
        Command::Price(a) => (a, cmd_price),
        Command::Sweep(a) => (a, cmd_sweep),
        Command::Density(a) => (a, cmd_density),
    };
    let cfg = args.resolve()?;
    let text = cmd(&cfg)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Validation(format!("out: {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Numerical(e.to_string())),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
