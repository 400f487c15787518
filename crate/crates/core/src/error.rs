use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header {path}: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },

    #[error("unsupported storage format {format} in {path}")]
    UnsupportedFormat { path: PathBuf, format: String },

    #[error("truncated signal file {path}: expected {expected} bytes, found {found}")]
    TruncatedSignal {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("annotation at sample {index} is beyond signal end ({len}) in {path}")]
    AnnotationOutOfRange {
        path: PathBuf,
        index: usize,
        len: usize,
    },

    #[error("malformed annotation file {path}: {reason}")]
    MalformedAnnotation { path: PathBuf, reason: String },

    #[error("dataset integrity: {0}")]
    Integrity(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("filter design: {0}")]
    FilterDesign(String),

    #[error("training: {0}")]
    Training(String),

    #[error("stratification: {0}")]
    Stratification(String),

    #[error("solver did not converge: {0}")]
    Convergence(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
