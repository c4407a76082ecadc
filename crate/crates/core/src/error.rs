use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("comment {source_id:?} has an empty author_id")]
    EmptyAuthor { source_id: String },

    #[error("insufficient comments for eval split: {}", describe_shortfall(.0))]
    InsufficientComments(Vec<(String, usize)>),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("backend {backend_id:?} unavailable: {reason}")]
    BackendUnavailable { backend_id: String, reason: String },

    #[error("unknown backend id {0:?}")]
    UnknownBackend(String),

    #[error("token {token:?} is not in the vocabulary of {backend_id:?}")]
    UnknownToken { backend_id: String, token: String },

    #[error("non-finite log-probability in {candidate}")]
    NonFiniteLogProb { candidate: String },

    #[error("calibration set must contain both same-author and different-author pairs")]
    SingleClassCalibration,

    #[error("config hash mismatch: checkpoint has {checkpoint}, config has {config}")]
    ConfigHashMismatch { checkpoint: String, config: String },

    #[error("disjointness violated: {0} source ids shared between needles and haystack")]
    Leakage(usize),

    #[error("rewriter {id:?} failed: {reason}")]
    Rewriter { id: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {source}")]
    Json {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Serde(#[from] serde_json::Error),

    #[error("config: {0}")]
    Config(String),

    #[error("plot: {0}")]
    Plot(String),
}

fn describe_shortfall(authors: &[(String, usize)]) -> String {
    authors
        .iter()
        .map(|(a, n)| format!("{a} ({n} comments)"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
