use thiserror::Error;

use crate::nonlinear::NewtonReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid band shape: n={n}, kl={kl}, ku={ku}")]
    InvalidBandShape { n: usize, kl: usize, ku: usize },

    #[error("operation requires {what}")]
    Unsupported { what: &'static str },

    #[error("zero pivot at row {index}")]
    SingularPivot { index: usize },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("matrix is not positive definite: non-positive pivot at index {index}")]
    NotPositiveDefinite { index: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("singular Jacobian at Newton iteration {iteration} (zero pivot at row {row})")]
    SingularJacobian { iteration: usize, row: usize },

    #[error(
        "Newton iteration did not converge after {} iterations (last residual {:e})",
        report.iterations,
        report.residual_norms.last().copied().unwrap_or(report.initial_residual)
    )]
    NotConverged { report: Box<NewtonReport<f64>> },

    #[error("pendulum constants did not converge after {iterations} iterations (residual {residual:e})")]
    ConstantsNotConverged { iterations: usize, residual: f64 },

    #[error("refinement round {round}: {source}")]
    Refinement {
        round: usize,
        #[source]
        source: Box<Error>,
    },
}
