//! Error type shared across parsing, validation, and the numeric pipeline.

use thiserror::Error;

/// Errors produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A row or element that could not be parsed, with its 1-based line.
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },

    /// A numeric field outside its legal range.
    #[error("line {line}: {field} out of range: {value}")]
    OutOfRange {
        line: u64,
        field: &'static str,
        value: f64,
    },

    /// Input that is not the expected document type at all.
    #[error("not a valid {expected} document: {detail}")]
    InvalidDocument {
        expected: &'static str,
        detail: String,
    },

    /// Derivative operators need at least two curve points.
    #[error("insufficient points: need at least 2, got {0}")]
    InsufficientPoints(usize),

    /// A streamed sample arrived with a timestamp before the previous one.
    #[error("out-of-order sample: {got} arrived after {last}")]
    OutOfOrder { got: String, last: String },

    /// A synthetic scenario that violates its own constraints.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
