use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Parse {
        path: PathBuf,
        /// 1-based line of the offending token, when known.
        line: Option<usize>,
        /// Dotted path of the offending field, when known.
        field: Option<String>,
        message: String,
    },

    #[error("{path}: schema_version {found} is not supported (expected {expected})")]
    SchemaVersionMismatch { path: PathBuf, found: u64, expected: u64 },

    #[error("cannot read {path}: {source}")]
    ReadInput { path: PathBuf, source: std::io::Error },

    #[error("{experiment} failed during {stage}: {source}")]
    Numerical {
        experiment: &'static str,
        stage: &'static str,
        source: asym_core::Error,
    },

    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("cannot encode the report: {0}")]
    Encode(String),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::SchemaVersionMismatch { .. } | CliError::ReadInput { .. } => {
                crate::EXIT_CONFIG
            }
            CliError::Numerical { .. } | CliError::Io { .. } | CliError::Encode(_) => crate::EXIT_NUMERICAL,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
