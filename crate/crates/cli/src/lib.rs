//! Command-line front end: configuration, subcommands and serialization.

pub mod commands;
pub mod config;
pub mod output;

use std::process::ExitCode;

use optosqueeze::Error;

pub use commands::{run, Cli, Command};
pub use config::{parse_config, ConfigError, RunConfig};

/// Process exit status for each failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Unstable = 2,
    Config = 3,
    NonConvergence = 4,
    Calibration = 5,
}

impl Exit {
    pub fn code(self) -> u8 {
        self as u8
    }
}

impl From<Exit> for ExitCode {
    fn from(e: Exit) -> Self {
        ExitCode::from(e.code())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit(&self) -> Exit {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Io(_) => Exit::Config,
            CliError::Csv(_) => Exit::Config,
            CliError::Model(e) => match e {
                Error::Unstable { .. } => Exit::Unstable,
                Error::Calibration { .. } => Exit::Calibration,
                Error::Domain(_) => Exit::Config,
                Error::NonConvergence { .. } | Error::EigenFailure | Error::Computation(_) | Error::UndefinedPhase => {
                    Exit::NonConvergence
                }
            },
        }
    }
}
