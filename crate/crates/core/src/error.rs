use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |m - m†| = {deviation:.3e})")]
    NonHermitianInput { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid time grid: {0}")]
    GridError(String),

    #[error("{name} = {value} out of range: {range}")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("quadrature did not converge within {intervals} intervals (last relative change {rel_change:.3e})")]
    QuadratureNotConverged { intervals: usize, rel_change: f64 },

    #[error("{path}: parse error: {message}")]
    Parse { path: String, message: String },

    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("nothing to render: {0}")]
    EmptyInput(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("at {context}: {source}")]
    AtGridPoint {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures caused by user input rather than numerics.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Parse { .. }
            | Error::Validation { .. }
            | Error::ParamOutOfRange { .. }
            | Error::Io { .. }
            | Error::EmptyInput(_) => true,
            Error::AtGridPoint { source, .. } => source.is_validation(),
            _ => false,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
