use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("grid array needs at least {min} nodes, got {actual}")]
    TooFewNodes { min: usize, actual: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular linear system (zero pivot in column {column})")]
    Singular { column: usize },

    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("nonpositive charge {0}")]
    NonPositiveCharge(f64),

    #[error("phase undefined for a zero field")]
    ZeroField,

    #[error("refinement ratio is not dyadic: {0}")]
    NonDyadic(String),

    #[error("trajectory {trajectory} failed at step {step}: {source}")]
    Trajectory {
        trajectory: u64,
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{failed} of {total} trajectories failed, above the 1% threshold")]
    FailureThreshold { failed: usize, total: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
