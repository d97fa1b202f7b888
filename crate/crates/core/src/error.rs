use thiserror::Error;

use crate::minimizer::MinimizerSolution;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The smoothed solver ran out of iterations. The best iterate is kept so
    /// callers can inspect or reuse it.
    #[error("solver did not converge after {iterations} iterations (gradient residual {residual:e})")]
    Convergence {
        iterations: usize,
        residual: f64,
        best: Box<MinimizerSolution>,
    },

    /// Linear constraints are degenerate on the current basis.
    #[error("constraint rank deficiency: {0}")]
    Rank(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
