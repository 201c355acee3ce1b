//! `besovlab`: generate sampled measures, run regularity criteria and sweeps.

mod commands;
mod ingest;

use std::process::ExitCode;

use besov_lab::LabError;
use clap::Parser;

use crate::commands::Cli;

/// Failures surfaced to the shell, each with its own exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Lab(#[from] LabError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lab(e) => match e {
                LabError::Parameter(_) | LabError::Configuration(_) => 2,
                LabError::Resolution { .. }
                | LabError::BelowResolution { .. }
                | LabError::Size { .. }
                | LabError::Data(_)
                | LabError::Io(_) => 3,
                LabError::Numeric(_) => 4,
            },
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("besovlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
