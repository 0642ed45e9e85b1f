use dpcnn_optics::OpticsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("not a dataset file (bad magic)")]
    BadMagic,
    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("truncated file: {0}")]
    Truncated(String),
    #[error("{0} checksum mismatch")]
    Checksum(&'static str),
    #[error("malformed file: {0}")]
    Format(String),
    #[error("split would leave the {0} set empty")]
    EmptySplit(&'static str),
}

pub type Result<T> = std::result::Result<T, DataError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(DataError::InvalidArgument(msg.into()))
}
