use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("sequence too short: need at least {needed} terms, got {got}")]
    Length { needed: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("input is not positive semidefinite at truncation (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("inconclusive: {reason} (condition {condition:e}, residual {residual:e})")]
    Inconclusive {
        reason: String,
        condition: f64,
        residual: f64,
    },

    #[error("window of {window} slots too small: computation needs {needed}")]
    WindowTooSmall { window: usize, needed: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("structural violation: {0}")]
    Structural(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}

impl Error {
    pub(crate) fn inconclusive(reason: impl Into<String>, condition: f64, residual: f64) -> Self {
        Error::Inconclusive {
            reason: reason.into(),
            condition,
            residual,
        }
    }

    /// True for errors caused by the caller's input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::InvalidInput(_) | Error::Length { .. }
        )
    }
}
