use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A configuration or parameter invariant was violated.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("chart mismatch: expected {expected}, found {found}")]
    ChartMismatch { expected: String, found: String },

    #[error("root solver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    /// A structural hypothesis of a construction fails at a sample point.
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
}

pub type Result<T> = std::result::Result<T, Error>;
