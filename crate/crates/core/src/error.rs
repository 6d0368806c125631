use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("input contains no arcs")]
    EmptyInput,
    #[error("invalid degree spec: {0}")]
    DegreeSpec(String),
    #[error("node {node} is not in the graph ({node_count} nodes)")]
    UnknownNode { node: u64, node_count: usize },
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed binary file: {0}")]
    BadCache(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
