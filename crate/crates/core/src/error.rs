//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix has the wrong number of features.
    #[error("dimension mismatch: expected {expected} features, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// Construction- or argument-validation failure.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A ranking metric was asked for on data containing only one class.
    #[error("both classes required: {0}")]
    SingleClass(String),

    /// The optimizer produced a non-finite objective or iterate.
    #[error("non-finite objective at epoch {epoch}, step {step}")]
    NonFinite { epoch: usize, step: usize },

    /// A model file was written by a newer version of this crate.
    #[error("model schema version {found} is newer than supported version {supported}")]
    SchemaVersion { found: u32, supported: u32 },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("model file: {0}")]
    ModelFormat(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
