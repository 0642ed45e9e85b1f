use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpticsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("dimension error: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, OpticsError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(OpticsError::InvalidArgument(msg.into()))
}
