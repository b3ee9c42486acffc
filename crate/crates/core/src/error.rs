use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed table: {0}")]
    Shape(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("invalid independence query: {0}")]
    InvalidQuery(String),

    #[error("node `{node}` has {degree} parents-and-children, above the partition cap of {cap}")]
    PartitionCap { node: String, degree: usize, cap: usize },

    #[error("BIF parse error at line {line}, column {column}: {message}")]
    Bif { line: usize, column: usize, message: String },

    #[error("invalid network: {0}")]
    Network(String),

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
