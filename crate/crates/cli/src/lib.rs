//! Command-line front end for the `rwrs_core` simulation toolkit.

pub mod commands;
pub mod config;

use std::io::Write;

use thiserror::Error;

pub use commands::{execute, Outcome};
pub use config::{parse_config, Command, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// `--help` / `--version` text; not an error for the exit code.
    #[error("{0}")]
    Info(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => 0,
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::CheckFailed(_) => 3,
        }
    }

    pub(crate) fn from_clap(e: clap::Error) -> Self {
        use clap::error::ErrorKind;
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Info(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<rwrs_core::Error> for CliError {
    fn from(e: rwrs_core::Error) -> Self {
        match e {
            rwrs_core::Error::InvalidParameter(m) => CliError::Usage(m),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

/// Write the CSV of an executed run to its destination.
pub fn emit(cfg: &RunConfig, out: &Outcome) -> Result<(), CliError> {
    match &cfg.output {
        Some(path) => std::fs::write(path, &out.csv)?,
        None => std::io::stdout().lock().write_all(out.csv.as_bytes())?,
    }
    Ok(())
}

/// Execute a resolved configuration end to end and return the exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    let result = execute(cfg).and_then(|out| {
        emit(cfg, &out)?;
        eprintln!("{}", out.summary);
        if cfg.assert && !out.passed {
            return Err(CliError::CheckFailed(out.summary.clone()));
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("rwrs: {e}");
            e.exit_code()
        }
    }
}
