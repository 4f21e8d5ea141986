use thiserror::Error;

/// Errors raised by every part of the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("parse error at `{token}`: {message}")]
    Parse { token: String, message: String },

    #[error("unsupported grid: {0}")]
    UnsupportedGrid(String),

    #[error("index {index} out of range for size {size}")]
    Index { index: usize, size: usize },

    #[error("projection domain error: {0}")]
    ProjectionDomain(String),

    #[error("plan error: {0}")]
    Plan(String),

    #[error("state error: {0}")]
    State(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid_argument(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn invalid_spec(msg: impl Into<String>) -> Error {
    Error::InvalidSpec(msg.into())
}
