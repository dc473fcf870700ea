use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A function argument violated its documented preconditions.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A scenario file or constructed scenario violated an invariant.
    #[error("invalid scenario field `{field}`: {reason}")]
    InvalidScenario { field: &'static str, reason: String },

    /// Transmitter placed on top of a sensing unit; the path-loss model
    /// diverges at zero distance.
    #[error("transmitter coincides with sensing unit {su_index} (distance below coincidence threshold)")]
    CoincidentWithSensor { su_index: usize },

    /// Cholesky factorization failed even after the diagonal jitter retry.
    #[error("shadowing covariance is not positive definite (duplicate sensing units?)")]
    NotPositiveDefinite,

    /// Least-squares design matrix is rank deficient.
    #[error("degenerate fit input: {0}")]
    DegenerateFit(String),

    /// Input sizes do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Signal power is zero; dB conversion is undefined.
    #[error("signal power is zero, RSS in dB is undefined")]
    ZeroPower,

    /// A text file failed to parse; `line` is 1-based.
    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    /// A JSON document failed to parse or validate.
    #[error("{path}: {reason}")]
    Json { path: PathBuf, reason: String },

    /// Filesystem error tagged with the offending path.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, reason: impl ToString) -> Self {
        Error::Json {
            path: path.into(),
            reason: reason.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
