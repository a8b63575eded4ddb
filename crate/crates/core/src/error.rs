use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the training and experiment pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("column {0} has zero standard deviation")]
    ConstantColumn(usize),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("Gram matrix is singular; use the SVD method when lambda = 0")]
    SingularSystem,

    #[error("proposal covariance is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    CholeskyFailure { min_eigenvalue: f64 },

    #[error("amplitudes contain NaN or infinite values")]
    NonFiniteAmplitude,

    #[error("SGD loss diverged: {loss:e} exceeds 1e6 x initial loss {initial:e}")]
    DivergedLoss { loss: f64, initial: f64 },

    #[error("target function is not one-dimensional")]
    NotOneDimensional,

    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: bad IDX magic number {found:#010x}")]
    BadMagic { path: PathBuf, found: u32 },

    #[error("{path}: file truncated (expected {expected} bytes, found {found})")]
    TruncatedFile {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("image/label count mismatch: {images} images, {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerical pipeline (as opposed to config or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ConstantColumn(_)
                | Error::SingularSystem
                | Error::CholeskyFailure { .. }
                | Error::NonFiniteAmplitude
                | Error::DivergedLoss { .. }
                | Error::NotOneDimensional
        )
    }

    /// Process exit status for the command-line tool: 3 for configuration,
    /// 4 for data and file problems, 5 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation { .. } | Error::Parse { .. } => 3,
            Error::BadMagic { .. }
            | Error::TruncatedFile { .. }
            | Error::CountMismatch { .. }
            | Error::InvalidDataset(_)
            | Error::Io { .. }
            | Error::Csv(_) => 4,
            _ => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
