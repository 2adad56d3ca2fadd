use thiserror::Error;

use crate::solver::SolveFailure;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("expected {expected} samples, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("support function not strictly convex (min eigenvalue of hessian + h I = {min_eigenvalue:.3e})")]
    NonConvex { min_eigenvalue: f64 },

    #[error("{what} must be positive and finite (found {value} at node {index})")]
    NonPositive {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no constant solution: C = {c} exceeds the isotropic threshold {threshold}")]
    NoConstantSolution { c: f64, threshold: f64 },

    #[error("no direction with positive projection onto the query vector")]
    NoVisibleNode,

    #[error("rejection sampling gave up after {attempts} attempts")]
    RejectionCapExceeded { attempts: usize },

    #[error("solve failed: {0}")]
    Solve(Box<SolveFailure>),

    #[error("unsupported schema version {found} (this build reads version {expected})")]
    SchemaVersion { found: u64, expected: u64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<SolveFailure> for Error {
    fn from(f: SolveFailure) -> Self {
        Error::Solve(Box::new(f))
    }
}
