use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index out of range: {0}")]
    Index(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
