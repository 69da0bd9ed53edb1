use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the scheduling toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    /// An instance field violates one of its invariants.
    #[error("invalid instance field `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("CSV error: {0}")]
    Csv(String),

    #[error("unknown energy source `{0}`")]
    UnknownSource(String),

    #[error("period {period} has zero total generation")]
    ZeroGeneration { period: usize },

    /// Some operation cannot be placed inside the horizon at all.
    #[error("infeasible instance: {0}")]
    InfeasibleInstance(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("instance has no price series; the cost objective needs one")]
    MissingPrices,

    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("instance generation failed: {0}")]
    Generation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
