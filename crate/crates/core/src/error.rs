use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("shape violation: {0}")]
    Shape(String),
    #[error("outside the admissible domain: {0}")]
    Domain(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("action is singular: {0}")]
    ActionSingularity(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("sampling failed: {0}")]
    Sampling(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("bad configuration: {0}")]
    Configuration(String),
    #[error("parse error: {0}")]
    Parse(String),
}
