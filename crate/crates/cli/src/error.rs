use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Records { path: PathBuf, line: usize, message: String },
    #[error(transparent)]
    Core(#[from] qcrevival_core::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// Process exit code: 2 for bad configuration, 3 for I/O and record files.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(qcrevival_core::Error::Config(_) | qcrevival_core::Error::OutOfRange { .. }) => 2,
            CliError::Io { .. } | CliError::Records { .. } => 3,
            CliError::Core(_) => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
