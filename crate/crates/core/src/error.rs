use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point id {id} out of range for {n} points")]
    IdOutOfRange { id: u64, n: usize },

    #[error("point set is empty")]
    EmptyPointSet,

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("query {query} reports point {id}, which is not a true range result")]
    InvalidResult { query: usize, id: u32 },

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("unknown point file extension for {0} (expected .fbin, .u8bin or .i8bin)")]
    UnknownExtension(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
