use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient non-edges: need {needed}, only {available} available")]
    InsufficientNonEdges { needed: usize, available: u64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("external scores: {0}")]
    ExternalScores(String),

    #[error("missing result for network `{network}`, algorithm `{algorithm}`")]
    MissingCell { network: String, algorithm: String },

    #[error("every hyperparameter configuration failed for {0}")]
    AllConfigurationsFailed(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
