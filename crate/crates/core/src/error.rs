use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DgError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("rejected problem: {0}")]
    RejectedProblem(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
}

pub type Result<T> = std::result::Result<T, DgError>;

pub(crate) fn invalid(msg: impl Into<String>) -> DgError {
    DgError::InvalidArgument(msg.into())
}
