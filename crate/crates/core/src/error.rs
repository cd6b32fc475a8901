use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the estimators, generators and the sweep harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("alpha = {alpha} outside [1, {max}]")]
    InvalidAlpha { alpha: f64, max: f64 },

    #[error("pair budget K = {budget} outside [1, {max}]")]
    InvalidBudget { budget: usize, max: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed data in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{context}: {source}")]
    Trial {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Coarse classification used by front ends to pick an exit status.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) | Error::InvalidAlpha { .. } | Error::InvalidBudget { .. } => {
                ErrorCategory::Config
            }
            Error::InvalidInput(_)
            | Error::DegenerateData(_)
            | Error::InsufficientData(_)
            | Error::Shape(_)
            | Error::Parse { .. } => ErrorCategory::Data,
            Error::Io { .. } => ErrorCategory::Io,
            Error::Trial { source, .. } => source.category(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Data,
    Io,
}

pub type Result<T> = std::result::Result<T, Error>;
