//! `berryline` command-line interface.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::Settings;

#[derive(Debug, Parser)]
#[command(
    name = "berryline",
    version,
    about = "Berry phases, node lines, ring spectra and spin transport for the E⊗ε Jahn-Teller model"
)]
struct Cli {
    /// Flat `key = value` settings file; flags on the command line win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Node lines of the anchor overlap over a sweep of circle radii
    NodalMap(commands::NodalMapArgs),
    /// Node count, Berry phase and MAB class of one loop
    Berry(commands::BerryArgs),
    /// Lowest levels of a ring with periodic, antiperiodic or barrier boundaries
    Spectrum(commands::SpectrumArgs),
    /// Conical intersections inside a rectangle
    LocateCi(commands::LocateCiArgs),
    /// Driven spin along a circular nuclear orbit
    Spin(commands::SpinArgs),
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("ConfigSyntax: {}:{line}: {reason}", path.display())]
    ConfigSyntax {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("UnknownKey: `{key}` in {} is not a setting of `{command}`", path.display())]
    UnknownKey {
        key: String,
        command: &'static str,
        path: PathBuf,
    },
    #[error("InvalidValue: {key} = `{value}`: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("MissingValue: `{key}` is required")]
    MissingValue { key: &'static str },
    #[error("InvalidThreads: BERRYLINE_THREADS = `{value}` must be a positive integer")]
    InvalidThreads { value: String },
    #[error("Io: {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    /// A library precondition violated by the configuration itself.
    #[error(transparent)]
    Config(berryline::Error),
    #[error(transparent)]
    Numeric(berryline::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Numeric(_) => 3,
            _ => 2,
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("BERRYLINE_THREADS") else {
        return Ok(());
    };
    let threads = match value.trim().parse::<usize>() {
        Ok(n) if n > 0 => n,
        _ => return Err(CliError::InvalidThreads { value }),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .expect("global pool is configured once, before any parallel work");
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let settings = Settings::load(cli.config.as_deref())?;
    match cli.command {
        Command::NodalMap(a) => commands::nodal_map_cmd(a, &settings),
        Command::Berry(a) => commands::berry_cmd(a, &settings),
        Command::Spectrum(a) => commands::spectrum_cmd(a, &settings),
        Command::LocateCi(a) => commands::locate_ci_cmd(a, &settings),
        Command::Spin(a) => commands::spin_cmd(a, &settings),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
