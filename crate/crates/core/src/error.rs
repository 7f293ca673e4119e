use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("singleton values must be nonzero")]
    ZeroValue,
    #[error("instance too large for exhaustive enumeration: {0}")]
    EnumerationGuard(String),
    #[error("duplicate encoder columns {0} and {1}")]
    DuplicateColumns(usize, usize),
    #[error("reconstruction column {column} is contained in several encoder columns ({candidates:?})")]
    AmbiguousContainment { column: usize, candidates: Vec<usize> },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
