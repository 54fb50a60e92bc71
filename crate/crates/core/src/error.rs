use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    /// The relative rotation between two consecutive samples reached pi,
    /// so the angular velocity cannot be recovered unambiguously.
    #[error("rotation aliasing: relative angle {angle} rad between samples is not below pi")]
    Aliasing { angle: f64 },

    #[error("numerical divergence at step {step} (t = {time} s)")]
    NumericalDivergence { step: usize, time: f64 },

    #[error("parse error at line {line} (byte offset {offset}): {message}")]
    Parse {
        line: usize,
        offset: usize,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("unsupported schema version {found:?}, expected {expected:?}")]
    SchemaVersion { found: String, expected: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
