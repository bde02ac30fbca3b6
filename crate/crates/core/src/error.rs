use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("episode already complete at step {0}")]
    EpisodeComplete(usize),

    #[error("every child of the node has been exhausted")]
    ExhaustedNode,

    #[error("the search space has been exhausted after {episodes} episodes")]
    SearchSpaceExhausted { episodes: u64 },

    #[error("training diverged: {0}")]
    Divergence(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("export error: {0}")]
    Export(String),

    #[error("refusing to reuse {dir}: it holds results for config {found}, current config is {expected}")]
    HashMismatch {
        dir: PathBuf,
        found: String,
        expected: String,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code used by the command line front-end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::HashMismatch { .. } | Error::Domain(_) => 2,
            Error::NumericalFailure(_) | Error::Divergence(_) => 3,
            _ => 1,
        }
    }
}
