use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the retrieval pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("corpus error: {0}")]
    Corpus(String),

    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("no precomputed embedding for text hash {hash}")]
    MissingEmbedding { hash: String },

    #[error("transport error after {retries} retries: {message}")]
    Transport { message: String, retries: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("no cached decomposition for query {query:?}")]
    MissingDecomposition { query: String },

    #[error("K = {k} exceeds candidate pool size {pool}")]
    PoolTooSmall { k: usize, pool: usize },

    #[error("no connected selection of {k} tables exists")]
    Infeasible { k: usize },

    #[error("oracle refused: pool of {pool} tables exceeds the enumeration guard of {limit}")]
    OracleRefused { pool: usize, limit: usize },

    #[error("solver time limit of {0:?} exceeded")]
    TimeLimit(std::time::Duration),

    #[error("search limit reached: {0}")]
    SearchLimit(String),

    #[error("solver paths disagree: structured objective {structured}, branch-and-bound objective {branch_and_bound}")]
    SolverDisagreement {
        structured: f64,
        branch_and_bound: f64,
    },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(file: impl ToString, line: usize, message: impl ToString) -> Self {
        Error::Parse {
            file: file.to_string(),
            line,
            message: message.to_string(),
        }
    }
}
