use std::path::PathBuf;

use thiserror::Error;

use crate::detection::BayesOutcome;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("states are linearly dependent: {0}")]
    LinearDependence(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("gain has no sign change on (0, 1) for block length {n}")]
    NoRoot { n: usize },

    /// The best measurement found so far is carried along.
    #[error("Bayes-cost reduction did not converge within {sweeps} sweeps")]
    Unconverged {
        sweeps: usize,
        best: Box<BayesOutcome>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
