use thiserror::Error;

/// Errors raised by the eigenpath toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("alpha = {0} lies outside [0, 1]")]
    AlphaOutOfRange(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} did not converge within {cap} iterations")]
    NonConvergence { what: String, cap: usize },

    #[error("size {size} exceeds the configured cap {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("matrix is numerically singular (condition estimate {0:e})")]
    Singular(f64),

    #[error("defective input: {0}")]
    Defective(String),

    #[error("construction failed near alpha = {alpha}: {reason}")]
    Construction { alpha: f64, reason: String },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures caused by malformed input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::InvalidInput(_)
                | Error::DimensionMismatch { .. }
                | Error::AlphaOutOfRange(_)
                | Error::NonFinite(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
