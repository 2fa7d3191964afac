//! `bolab`: command-line driver for Benjamin-Ono / Burgers inviscid-limit studies.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub mod commands;
pub mod config;
pub mod output;
pub mod plot;

pub const OUT_ENV: &str = "BOLAB_OUT";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Invariant(String),
    #[error("{0}")]
    BlowUp(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invariant(_) => 1,
            CliError::Config(_) => 2,
            CliError::BlowUp(_) => 3,
        }
    }
}

impl From<bolab_core::Error> for CliError {
    fn from(e: bolab_core::Error) -> Self {
        use bolab_core::Error as E;
        match e {
            E::BlowUp { .. } | E::MemberBlowUp { .. } | E::NonFinite(_) => {
                CliError::BlowUp(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bolab", version, about = "Spectral solver and inviscid-limit lab for the Benjamin-Ono equation")]
pub struct Cli {
    /// JSON run configuration (or a manifest from an earlier run).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory; the BOLAB_OUT environment variable takes precedence.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,

    /// Worker threads for `sweep` (0 = available parallelism).
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    pub workers: usize,

    /// Seed for randomized checks.
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one run and write diagnostics and snapshots.
    Simulate,
    /// Run the viscosity ladder against the inviscid reference.
    Sweep,
    /// Check the conservation and dissipation identities on one run.
    Invariants,
    /// Manufactured-solution accuracy study over a halving dt ladder.
    Mms,
    /// Log-log SVG of a sweep table.
    Plot {
        sweep_csv: PathBuf,
        out_svg: PathBuf,
    },
}

impl Cli {
    pub fn out_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.out.clone(),
        }
    }

    pub fn worker_count(&self) -> usize {
        if self.workers > 0 {
            self.workers
        } else {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }
    }

    fn config_path(&self) -> Result<&std::path::Path, CliError> {
        self.config
            .as_deref()
            .ok_or_else(|| CliError::Config("missing --config PATH".into()))
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate => commands::simulate(cli.config_path()?, &cli.out_dir()),
        Command::Sweep => commands::sweep(cli.config_path()?, &cli.out_dir(), cli.worker_count()),
        Command::Invariants => commands::invariants(cli.config_path()?, cli.seed),
        Command::Mms => commands::mms(cli.config_path()?, &cli.out_dir()),
        Command::Plot { sweep_csv, out_svg } => commands::plot(sweep_csv, out_svg),
    }
}
