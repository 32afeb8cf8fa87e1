use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = SdcorError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SdcorError {
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("empty dataset: {0}")]
    EmptyDataset(PathBuf),

    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: row {row} has {found} fields, expected {expected}")]
    Width {
        path: PathBuf,
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Tuning or sampling could not produce a usable configuration.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("unknown {kind} '{name}' (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("invalid model file: {0}")]
    Model(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl SdcorError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SdcorError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        SdcorError::InvalidArgument(msg.into())
    }
}
