use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Exit status for usage and parse errors.
pub const EXIT_USAGE: u8 = 64;
/// Exit status for file system errors.
pub const EXIT_IO: u8 = 74;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{source_name}:{line}: {msg}")]
    Parse { source_name: String, line: usize, msg: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Scenario(#[from] tracbf_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Io { .. } => EXIT_IO,
            _ => EXIT_USAGE,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
