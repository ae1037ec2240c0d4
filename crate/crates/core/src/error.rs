use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: objective expects {expected}, point has {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coordinate {index} = {value} outside box [{lower}, {upper}]")]
    OutOfBox {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("all local search instances have terminated")]
    Exhausted,

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
}
