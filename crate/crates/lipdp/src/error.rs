use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A structural contract between components was violated (e.g. a
    /// malformed tree decomposition or an inconsistent parse tree).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The root DP cell has no feasible solution.
    #[error("infeasible instance: no solution for root state {state}")]
    Infeasible { state: String },

    /// An exhaustive routine refused an input that is too large.
    #[error("instance too large for exhaustive search: n = {n}, limit = {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
