use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed program: {0}")]
    MalformedProgram(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("problem is infeasible: {0}")]
    Infeasible(String),

    #[error("problem is unbounded: {0}")]
    Unbounded(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("iteration limit of {limit} reached (last violation {violation:.3e})")]
    IterationLimit { limit: usize, violation: f64 },

    #[error("audit failed: {0}")]
    AuditFailed(String),

    #[error("i/o error at {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
