//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("polytope is unbounded (nontrivial recession cone)")]
    Unbounded,
    #[error("constraint system is infeasible or has empty interior")]
    Empty,
    #[error("polytope is not full-dimensional: {0}")]
    Degenerate(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("face dimension {k} out of range for dimension {dim}")]
    BadK { k: usize, dim: usize },
    #[error("search bound must be >= 1, got {0}")]
    BadBound(i64),
    #[error("point is on the boundary or outside the polytope")]
    BoundaryOrExterior,
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("sample too large: {got} nodes exceeds cap {cap}")]
    TooLarge { got: usize, cap: usize },
    #[error("transport solver failed to converge: {0}")]
    SolverDiverged(String),
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("normal fans do not match: {0}")]
    NormalFanMismatch(String),
    #[error("polytope is not Delzant: {0}")]
    NotDelzant(String),
    #[error("unknown test function id {0}")]
    UnknownTestFunction(String),
    #[error("invalid polytope input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
