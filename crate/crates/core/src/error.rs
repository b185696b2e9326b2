//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by constructors, numerical kernels and the pipeline.
#[derive(Debug, Error)]
pub enum SchroError {
    /// A problem definition violates an invariant (dimensions, signs,
    /// negativity of the Hermitian part, parameter ranges).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A numerical kernel failed to converge or overflowed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Configuration file / CLI level problem.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SchroError>;

impl SchroError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        SchroError::InvalidInput(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        SchroError::Numerical(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        SchroError::Config(msg.into())
    }
}
