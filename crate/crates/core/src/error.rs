use thiserror::Error;

use crate::linalg::SolveReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid knot configuration: {0}")]
    InvalidConfig(String),

    #[error("x = {x} lies outside the spline domain [{a}, {b}]")]
    OutOfDomain { x: f64, a: f64, b: f64 },

    #[error("derivative order {order} is not allowed here (valid range {min}..={max})")]
    InvalidOrder { order: usize, min: usize, max: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "non-positive value {value} in class {index}; zero counts must be imputed before the \
         logratio transform (e.g. with a model-based replacement procedure)"
    )]
    NonPositive { index: usize, value: f64 },

    #[error("linear system is inconsistent (rank {}, residual {:.3e})", .0.rank, .0.residual_norm)]
    Inconsistent(SolveReport),
}
