use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LyhError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("degree underflow: {0}")]
    Degree(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("serialization: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, LyhError>;
