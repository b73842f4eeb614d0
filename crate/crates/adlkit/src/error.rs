//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong across the crate, with enough context to
/// point at the offending input (index paths for class files, trial numbers
/// for Monte Carlo decode failures, and so on).
#[derive(Debug, Error)]
pub enum AdlError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// A function class violates one of its structural invariants
    /// (non-finite value, extent mismatch, bad weights, ...).
    #[error("invalid class: {detail}")]
    InvalidClass { detail: String },

    /// An operation was called with arguments outside its domain.
    #[error("invalid parameter: {detail}")]
    InvalidParameter { detail: String },

    /// An index into hypotheses or points is out of range.
    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    /// A point subset contains the same index twice.
    #[error("duplicate point index {index}")]
    DuplicateIndex { index: usize },

    /// A matrix expected to be symmetric is not (beyond tolerance).
    #[error("matrix not symmetric: max deviation {max_dev:.3e}")]
    NonSymmetric { max_dev: f64 },

    /// An exhaustive computation was requested past its size guard.
    #[error("size guard exceeded: {detail}")]
    GuardExceeded { detail: String },

    /// A bitstring could not be decoded (truncated or malformed).
    #[error("decode error: {detail}")]
    Decode { detail: String },

    /// Decoding failed inside a Monte Carlo verification run.
    #[error("decode failed at trial {trial}: {detail}")]
    DecodeDuringTrial { trial: usize, detail: String },

    /// A postcondition this crate promises did not hold.
    #[error("invariant violated: {detail}")]
    InvariantViolated { detail: String },
}

pub type Result<T> = std::result::Result<T, AdlError>;

impl AdlError {
    pub(crate) fn invalid_class(detail: impl Into<String>) -> Self {
        AdlError::InvalidClass {
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid_parameter(detail: impl Into<String>) -> Self {
        AdlError::InvalidParameter {
            detail: detail.into(),
        }
    }

    pub(crate) fn decode(detail: impl Into<String>) -> Self {
        AdlError::Decode {
            detail: detail.into(),
        }
    }
}
