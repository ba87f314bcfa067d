use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point {value} lies outside [0, 1]")]
    OutsideUnitInterval { value: f64 },

    /// A coefficient recursion left the region where the momentum sequence is
    /// positive and finite.
    #[error("momentum sequence leaves the positive domain at k = {k} (alpha_k = {alpha})")]
    NonPositiveMomentum { k: usize, alpha: f64 },

    #[error("iteration diverged: residual is not finite at k = {k}")]
    Diverged { k: usize },

    #[error("stopping rule not applicable: {0}")]
    RuleNotApplicable(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
