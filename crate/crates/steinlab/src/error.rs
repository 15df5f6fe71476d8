//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by the numerical operations in this crate.
#[derive(Debug, Clone, Error)]
pub enum SteinError {
    /// An argument left the domain on which the operation stays within
    /// double-precision range.
    #[error("argument {value} outside domain |x| <= {max}")]
    DomainOverflow { value: f64, max: f64 },

    /// Adaptive integration exhausted its subdivision budget. Carries the
    /// best estimate and its error bound so callers can still report it.
    #[error("integration did not converge after {subdivisions} subdivisions: best estimate {best} +/- {error_estimate}")]
    NotConverged {
        best: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    /// A constructor or operation received arguments violating its contract.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A moment-matching precondition failed.
    #[error("moment mismatch: {0}")]
    MomentMismatch(String),

    /// An exact convolution would exceed the support cap.
    #[error("support too large: {needed} atoms exceeds cap {cap}")]
    SupportTooLarge { needed: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, SteinError>;
