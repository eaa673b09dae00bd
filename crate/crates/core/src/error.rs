use thiserror::Error;

use crate::vi_solver::Rejection;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown domain `{0}`")]
    UnknownDomain(String),

    #[error("unknown example `{0}`")]
    UnknownProblem(String),

    #[error("structured mesh needs at least one subdivision")]
    EmptySubdivision,

    #[error("element {0} out of range")]
    InvalidElement(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("configuration rejected: {0}")]
    Rejected(#[from] Rejection),

    #[error("obstacle must vanish on the boundary for this functional")]
    InvalidObstacle,

    #[error("active-set iteration did not converge after {iterations} iterations: {reason}")]
    NonConvergence { iterations: usize, reason: String },

    #[error("reduced linear system could not be factorized: {0}")]
    SingularSubsystem(String),

    #[error("problem has no exact solution")]
    MissingExactSolution,

    #[error("invalid marking parameter {0}; expected 0 < theta <= 1")]
    InvalidTheta(f64),

    #[error("column `{0}` not found")]
    MissingColumn(String),

    #[error("need at least {needed} rows for rate fitting, found {found}")]
    NotEnoughRows { needed: usize, found: usize },

    #[error("malformed table: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
