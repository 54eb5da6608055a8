use thiserror::Error;

/// Errors raised by the library. Search exhaustion is a distinct variant so
/// callers never confuse it with a negative decision.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("degenerate form: {0}")]
    Degenerate(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("field mismatch")]
    FieldMismatch,
    #[error("internal consistency failure: {0}")]
    Consistency(String),
    #[error("1 is not in Symd: orthogonal involutions in characteristic 2 are excluded")]
    SymdGate,
    #[error("capacity {0} where 4 is required")]
    Capacity(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
