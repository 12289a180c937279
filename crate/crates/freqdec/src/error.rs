//! Crate-wide error type.

use thiserror::Error;

/// Unified error type for all fallible operations in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed file contents (bad magic, inconsistent header fields).
    #[error("format error: {0}")]
    Format(String),

    /// Well-formed input that this crate deliberately does not handle.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Payload shorter or longer than the header promises.
    #[error("length error: {0}")]
    Length(String),

    /// Dimension / shape mismatch between operands.
    #[error("shape error: {0}")]
    Shape(String),

    /// Argument outside an operation's documented domain.
    #[error("invalid argument: {0}")]
    Invalid(String),

    /// Numerical failure (divergence, NaN, degenerate input).
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
