use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("validation failed ({invariant}): {detail}")]
    Validation { invariant: &'static str, detail: String },

    #[error("marginal totals differ")]
    UnbalancedMarginals,

    #[error("invalid semimetric: {0}")]
    InvalidSemimetric(String),

    #[error("plan is not subbistochastic: {0}")]
    NotSubbistochastic(String),

    #[error("factor is not normalized: {0}")]
    NotNormalized(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("io error: {0}")]
    Io(String),

    /// A solver produced an output that failed its own post-condition.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse { location: location.into(), message: message.into() }
    }

    /// Whether this error stems from bad input rather than a solver fault.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Internal(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
