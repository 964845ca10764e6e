use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Operand shapes or dimensions do not fit together.
    #[error("shape error: {0}")]
    Shape(String),
    /// A result would exceed the configured size guard.
    #[error("size error: {what} needs {needed}, limit is {limit}")]
    Size {
        what: &'static str,
        needed: u128,
        limit: u128,
    },
    /// A scalar parameter is outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),
    /// An index is out of range.
    #[error("index error: {index} not below {len}")]
    Index { index: usize, len: usize },
    /// An input object violates one of its invariants (PSD, normalization, ...).
    #[error("validation error: {0}")]
    Validation(String),
    /// The requested combination of options is not supported.
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("serialization error: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
