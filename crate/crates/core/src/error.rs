use thiserror::Error;

/// Errors raised by the moment library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("moment exponent a = {a} has the wrong parity for {formula} (expected {expected})")]
    Parity {
        formula: &'static str,
        a: u64,
        expected: &'static str,
    },

    #[error("Gamma is not defined here for nonpositive argument {0}")]
    NonPositiveGamma(String),

    #[error("value still carries a factor sqrt(pi)^{0}")]
    IrrationalResult(i32),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("cross-check mismatch: {0}")]
    CrossCheck(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
