//! Error type of the command-line tool and its exit codes.

use std::path::PathBuf;

use thiserror::Error;

/// Exit code for invalid arguments or configuration.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for solver failures.
pub const EXIT_SOLVER: i32 = 3;
/// Exit code for unreadable, unwritable or malformed files.
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("invalid configuration {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("CSV output: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(danm::Error),
    #[error("solver did not converge: {0}")]
    NotConverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => EXIT_USAGE,
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Csv(_) => EXIT_IO,
            CliError::NotConverged(_) => EXIT_SOLVER,
            CliError::Core(e) => match e {
                danm::Error::Dimension(_) | danm::Error::Domain(_) | danm::Error::TooLarge(_) => EXIT_USAGE,
                _ => EXIT_SOLVER,
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<danm::Error> for CliError {
    fn from(e: danm::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
