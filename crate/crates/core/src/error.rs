use thiserror::Error;

use crate::elements::ElementFamily;
use crate::mesh::CellKind;

/// Errors raised while reading a femmesh file. Every variant carries the
/// 1-based line number the problem was detected on.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("malformed header, line {line}: {msg}")]
    Header { line: usize, msg: String },
    #[error("unexpected token, line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("index out of range, line {line}: vertex {index} of {count}")]
    IndexOutOfRange { line: usize, index: usize, count: usize },
    #[error("degenerate cell, line {line}: signed area {area:e} is not positive")]
    Degenerate { line: usize, area: f64 },
    #[error("nonconforming edge, line {line}: {msg}")]
    Nonconforming { line: usize, msg: String },
    #[error("empty mesh")]
    Empty,
}

#[derive(Debug, Error)]
pub enum FemError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("unsupported quadrature degree {0}")]
    UnsupportedDegree(usize),
    #[error("unsupported element order {order} for {what}")]
    UnsupportedOrder { what: &'static str, order: usize },
    #[error("{family:?} is not defined on {kind:?} cells")]
    FamilyMismatch { family: ElementFamily, kind: CellKind },
    #[error("incompatible spaces: {0}")]
    Incompatible(String),
    #[error("degenerate geometry in cell {cell}: det J = {det:e}")]
    DegenerateGeometry { cell: usize, det: f64 },
    #[error("boundary attribute {0} is not present in the mesh")]
    UnknownAttribute(i32),
    #[error("DOF {dof} out of range for system of size {size}")]
    DofOutOfRange { dof: usize, size: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{solver} did not converge in {iterations} iterations (residual {residual:e})")]
    NotConverged { solver: &'static str, iterations: usize, residual: f64 },
}

pub type Result<T, E = FemError> = std::result::Result<T, E>;
