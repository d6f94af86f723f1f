use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A square-root radicand came within tolerance of zero.
    #[error("parameter lies on a square-root branch point (|radicand| = {radicand:.3e})")]
    BranchSingularity { radicand: f64 },

    #[error("basis term log-magnitude {log_magnitude:.1} exceeds cap {cap:.1}")]
    Overflow { log_magnitude: f64, cap: f64 },

    #[error("operation requires a continuous family, `{0}` is discrete")]
    DiscreteFamily(String),

    #[error("operation requires a discrete family, `{0}` is continuous")]
    ContinuousFamily(String),

    #[error("matrix not positive definite after {attempts} jitter escalations")]
    NotPd { attempts: usize },

    #[error("design matrix entry ({row}, {col}): {source}")]
    Entry {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("training failed at epoch {epoch}: {source}")]
    Training {
        epoch: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("relative L1 requested but the truth vector is identically zero")]
    ZeroTruth,

    #[error("energy lattice has no points inside the domain")]
    EmptyGrid,

    #[error("dataset is empty: {0}")]
    EmptyDataset(String),

    #[error("quadrature did not converge; worst coefficient ({j}, {k}) changed by {change:.3e}")]
    Quadrature { j: usize, k: usize, change: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at(self, row: usize, col: usize) -> Self {
        Error::Entry {
            row,
            col,
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
