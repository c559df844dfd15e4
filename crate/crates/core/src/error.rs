use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite input at component {index}")]
    NonFiniteInput { index: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite kernel coefficient `{name}`")]
    NonFiniteCoefficient { name: &'static str },

    #[error("covariance block is not positive semidefinite (determinant {determinant:e})")]
    IndefiniteCovariance { determinant: f64 },

    #[error("chain diverged at iteration {iteration}")]
    Diverged { iteration: usize },

    #[error("oracle failed on sample {sample}: {source}")]
    OracleFailure {
        sample: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("run {run} failed: {source}")]
    RunFailure {
        run: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unstable step: spectral radius of the drift matrix is {radius}")]
    UnstableStep { radius: f64 },

    #[error("singular covariance")]
    SingularCovariance,

    #[error("empty run set")]
    EmptyRunSet,

    /// `line` is 1-based; 0 means a command-line override.
    #[error("{}line {line}: {reason}", path.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default())]
    Config {
        path: Option<PathBuf>,
        line: usize,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
