use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid loss: {0}")]
    InvalidLoss(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("variability undefined: {0}")]
    VariabilityUndefined(String),

    #[error("variability unsupported for dimension {0}")]
    VariabilityUnsupported(usize),

    #[error("prox unbounded: {0}")]
    ProxUnbounded(String),

    #[error("ball multiplier bracket not found (alpha_max = {alpha_max:e})")]
    BracketNotFound { alpha_max: f64 },

    #[error("ball multiplier search did not converge after {iterations} iterations (residual {residual:e})")]
    AlphaSearch { iterations: usize, residual: f64 },

    #[error("empty sequence")]
    EmptySequence,

    #[error("comparator unbounded: {0}")]
    ComparatorUnbounded(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
