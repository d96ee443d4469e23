use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("not doubly stochastic: {0}")]
    InvalidMatrix(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// An exact routine would have to enumerate more objects than allowed.
    #[error("desk-scale limit exceeded: {what} requires {count} items, cap is {cap}")]
    DeskScale {
        what: &'static str,
        count: u128,
        cap: u128,
    },

    #[error("operation requires demand 1, request has demand {0}")]
    WrongDemand(usize),

    #[error("malformed instance{}: {message}", match .request { Some(i) => format!(" (request {i})"), None => String::new() })]
    Parse {
        request: Option<usize>,
        message: String,
    },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("round {round}: {source}")]
    Round {
        round: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("block {block}: {source}")]
    Block {
        block: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the root cause is a desk-scale cap.
    pub fn is_desk_scale(&self) -> bool {
        match self {
            Error::DeskScale { .. } => true,
            Error::Round { source, .. } | Error::Block { source, .. } => source.is_desk_scale(),
            _ => false,
        }
    }

    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Round { source, .. } | Error::Block { source, .. } => source.is_io(),
            _ => false,
        }
    }
}
