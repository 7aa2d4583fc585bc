use crate::Vector;

/// Errors produced by the solver, simulators and benchmark harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid index schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    /// An iterative solver ran out of iterations. Carries the best iterate seen.
    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        residual: f64,
        iterations: usize,
        best: Box<Vector>,
    },

    #[error("linear system is not positive definite")]
    NotPositiveDefinite,

    #[error("reference minimizer has zero norm; relative error undefined")]
    ZeroReference,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
