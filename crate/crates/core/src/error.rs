use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{kind} id {id} at item {index} is out of range (must be < {limit})")]
    IdOutOfRange {
        kind: &'static str,
        index: usize,
        id: usize,
        limit: usize,
    },
    #[error("a graph needs at least one node")]
    EmptyGraph,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("set similarity is undefined for an empty set")]
    EmptySet,
    #[error("match score is undefined for an empty cover")]
    EmptyCover,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
