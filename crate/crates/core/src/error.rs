use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    /// A configuration value failed validation; `field` is the offending key.
    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    #[error("solution blew up after t = {last_valid_t}")]
    BlowUp { last_valid_t: f64 },

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("non-positive value {value} at epsilon = {epsilon}; log-log fit undefined")]
    NonPositiveValue { epsilon: f64, value: f64 },

    #[error("reference solution rejected: {0}")]
    ReferenceRejected(String),

    #[error("sweep member epsilon = {epsilon} blew up after t = {last_valid_t}")]
    MemberBlowUp { epsilon: f64, last_valid_t: f64 },
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn arg(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}
