//! Error type shared by all toolkit modules.

use thiserror::Error;

/// Unified error for generation, simulation, training, and analysis.
#[derive(Debug, Error)]
pub enum Error {
    /// A function argument is outside its documented domain.
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: String,
        reason: String,
    },

    /// A configuration struct fails validation as a whole.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Reading or parsing an external data file failed.
    #[error("failed to ingest `{path}`: {reason}")]
    Ingestion { path: String, reason: String },

    /// Not enough samples for the requested operation.
    #[error("series too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    /// A series or matrix is degenerate (constant, empty, or rank deficient).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Array shapes or lengths do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An iteration produced a non-finite value.
    #[error("numerical divergence at step {step}: {what}")]
    Divergence { step: usize, what: String },

    /// A linear solve could not be completed to tolerance.
    #[error("linear solve failed: {0}")]
    Solver(String),

    /// Filesystem or serialization failure while persisting results.
    #[error("i/o error at `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, value: impl std::fmt::Display, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            value: value.to_string(),
            reason: reason.into(),
        }
    }
}
