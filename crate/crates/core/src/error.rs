use thiserror::Error;

use crate::model::SolveTrace;

/// Errors raised by the solvers, diagnostics and instance readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported penalty: {0}")]
    UnsupportedPenalty(String),

    #[error("submatrix on columns {columns:?} is rank deficient")]
    SingularSubmatrix { columns: Vec<usize> },

    #[error("enumeration budget exceeded: {required} evaluations needed, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("inner solver failed at outer iteration {iteration} (kkt residual {kkt_residual:e})")]
    InnerSolverFailed {
        iteration: usize,
        kkt_residual: f64,
        partial: Box<SolveTrace>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
