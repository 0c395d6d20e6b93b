use thiserror::Error;

use crate::certify::Certificate;

/// Errors produced by the polywell library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A matrix could not be constructed from the given data.
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    /// Operands have incompatible dimensions.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The Jacobi SVD did not converge within its sweep budget.
    #[error("SVD did not converge after {sweeps} sweeps")]
    SvdNoConvergence { sweeps: usize },

    /// The largest singular value does not dominate enough to break the
    /// rank-one condition at the origin.
    #[error("no rank-one violation exists at Z = 0 for these singular values")]
    NoViolationExists,

    /// The operation requires a polyconvex double well.
    #[error("double well is not polyconvex")]
    NotPolyconvex(Box<Certificate>),

    /// A mesh failed validation.
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    /// A triangle has (near) zero or negative signed area.
    #[error("degenerate triangle {index}: signed area {area:e}")]
    DegenerateTriangle { index: usize, area: f64 },

    /// A nodal field does not match the mesh it is used with.
    #[error("field has {got} nodes, mesh has {expected}")]
    FieldLength { expected: usize, got: usize },

    /// Two fields that must share boundary values differ at a boundary node.
    #[error("boundary values differ at node {node}")]
    BoundaryMismatch { node: usize },

    /// Option values out of their admissible range.
    #[error("invalid options: {0}")]
    InvalidOptions(String),

    /// Malformed CSV or JSON input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
