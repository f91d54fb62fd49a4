use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("atom {atom} out of range (knowledge base has {atom_count} atoms)")]
    AtomOutOfRange { atom: u32, atom_count: usize },

    #[error("invalid rule {rule}: {reason}")]
    InvalidRule { rule: u32, reason: String },

    #[error("knowledge base construction failed: {0}")]
    Construction(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("query {query} is not derivable from the base facts")]
    Unanswerable { query: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty distribution")]
    EmptyDistribution,

    #[error("model violation: {0}")]
    ModelViolation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
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
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
