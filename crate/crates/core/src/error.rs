use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header in {path}: {reason}")]
    Header { path: PathBuf, reason: String },

    #[error("payload holds {actual} voxels, header declares {expected}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("non-finite intensity at voxel {index} ({x}, {y}, {z})")]
    NonFinite {
        index: usize,
        x: usize,
        y: usize,
        z: usize,
    },

    #[error("mask has no nonzero voxels")]
    EmptyMask,

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimsMismatch { left: [usize; 3], right: [usize; 3] },

    #[error("region of interest is empty")]
    EmptyRoi,

    #[error("{0} matrix is empty: no voxel has an in-roi neighbour")]
    EmptyMatrix(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("need at least {required} observations, got {actual}")]
    InsufficientData { required: usize, actual: usize },

    #[error("non-positive value {value} at index {index} on the log-ratio path")]
    NonPositive { index: usize, value: f64 },

    #[error("{0}")]
    Degenerate(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn header(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Header {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// The file this error refers to, if any.
    pub fn path(&self) -> Option<&std::path::Path> {
        match self {
            Error::Io { path, .. } | Error::Header { path, .. } => Some(path),
            _ => None,
        }
    }
}
