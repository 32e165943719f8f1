use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    /// A value that parsed but fails validation; `key` is `section.key`.
    #[error("invalid {key}: {msg}")]
    Validation { key: String, msg: String },

    #[error("cache {path}:{line}: {msg}")]
    Cache { path: PathBuf, line: usize, msg: String },

    #[error(transparent)]
    Core(#[from] orbitforge_core::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn validation(key: &str, msg: impl Into<String>) -> Self {
        CliError::Validation { key: key.to_string(), msg: msg.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
