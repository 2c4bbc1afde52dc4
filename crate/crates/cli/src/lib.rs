//! Scenario runner: loads a configuration, drives the simulation engines and
//! writes plot-ready CSV and JSON artifacts.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
mod output;

pub use config::Scenario;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit status for configuration and I/O problems.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for failures inside the engines.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{op} failed: {source}")]
    Numerical {
        op: &'static str,
        source: tmsq_core::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io { .. } => EXIT_CONFIG,
            Self::Numerical { .. } => EXIT_NUMERICAL,
        }
    }
}

/// Attaches the failing operation's name to an engine error.
pub(crate) trait Op<T> {
    fn op(self, name: &'static str) -> Result<T, CliError>;
}

impl<T> Op<T> for tmsq_core::Result<T> {
    fn op(self, name: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numerical { op: name, source })
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "tmsq",
    version,
    about = "Two-mode squeezing of mechanical oscillators: simulation runner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Scenario file (JSON, flat unit-suffixed keys).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set nbar0=0.1`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory; overrides `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Noise seed; overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Velocity width versus evolution time for both relative phases.
    Widths(Common),
    /// Duan–Simon value and EPR product of the two output modes.
    Criteria(Common),
    /// Phonon-number tables of the two-mode and single-mode squeezed states.
    Fock(Common),
    /// Red/blue sideband ratio versus squeezing for both state families.
    Ratio(Common),
    /// Squeeze-evolve-unsqueeze echo trace and its fitted decay.
    Echo(Common),
    /// Wigner-function projections of the output modes.
    Wigner(Common),
    /// Synthesized Raman velocimetry scans and their Gaussian fits.
    Velocimetry(Common),
    /// Validate the configuration and report derived quantities.
    Validate(Common),
}

fn load(common: &Common) -> Result<Scenario, CliError> {
    let overrides = common
        .overrides
        .iter()
        .map(|s| config::parse_override(s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut scenario = Scenario::load(common.config.as_deref(), &overrides)?;
    if let Some(out) = &common.out {
        scenario.output_dir = out.clone();
    }
    if let Some(seed) = common.seed {
        scenario.seed = seed;
    }
    Ok(scenario)
}

/// Runs the command line `args` (including the program name) and returns
/// the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<String, CliError> {
    match command {
        Command::Widths(c) => commands::widths(&load(&c)?),
        Command::Criteria(c) => commands::criteria(&load(&c)?),
        Command::Fock(c) => commands::fock(&load(&c)?),
        Command::Ratio(c) => commands::ratio(&load(&c)?),
        Command::Echo(c) => commands::echo(&load(&c)?),
        Command::Wigner(c) => commands::wigner(&load(&c)?),
        Command::Velocimetry(c) => commands::velocimetry(&load(&c)?),
        Command::Validate(c) => commands::validate(&load(&c)?),
    }
}
