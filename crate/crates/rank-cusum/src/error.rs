//! Error type shared by all library operations.

use thiserror::Error;

/// Errors produced by estimators, tests, and experiment runners.
#[derive(Debug, Error)]
pub enum Error {
    /// The input violates a documented precondition (mismatched lengths,
    /// out-of-range parameters, non-finite values, malformed configuration).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A variance normalizer degenerated to zero, so the normalized test
    /// statistic is undefined (e.g. perfectly comonotone data or a constant
    /// margin).
    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    /// The kernel-weighted variance estimate came out non-positive and the
    /// configuration requested a hard error instead of the lag-0 fallback.
    #[error("non-positive long-run variance estimate: {0}")]
    NegativeLrv(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
