//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix/vector dimensions do not line up.
    #[error("shape error: {0}")]
    Shape(String),

    /// Input violates a mathematical precondition (empty group, constant
    /// target, invalid probability table, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A run or experiment configuration is invalid.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed or inconsistent input data (CSV parsing, schema mismatch).
    #[error("data error: {0}")]
    Data(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A training loss became NaN or infinite; the run is aborted.
    #[error("non-finite value: {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
