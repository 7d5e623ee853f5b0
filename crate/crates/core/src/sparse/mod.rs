//! Typed sparse matrices and the kernel operations over them.

pub mod csc;
pub mod dim;
mod matrix;
pub mod ops;

pub use csc::{CscBuilder, CscMatrix};
pub use dim::{Dimension, Space};
pub use matrix::{DenseVector, Orientation, Payload, TypedMatrix};

#[derive(Debug, thiserror::Error)]
pub enum SparseError {
    #[error("{op}: dimension mismatch between {left} and {right}")]
    DimensionMismatch {
        op: &'static str,
        left: Dimension,
        right: Dimension,
    },
    #[error("{rows}x{cols} storage does not fit type {col_dim} -> {row_dim}")]
    ShapeMismatch {
        rows: u64,
        cols: u64,
        row_dim: Dimension,
        col_dim: Dimension,
    },
    #[error("{op}: expected a vector, got {rows} -> {cols}")]
    NotAVector {
        op: &'static str,
        rows: Dimension,
        cols: Dimension,
    },
    #[error("product space {left} x {right} exceeds 64-bit indexing")]
    SpaceOverflow { left: Dimension, right: Dimension },
    #[error("negative cell {value} at ({row}, {col})")]
    NegativeCell { row: u64, col: u64, value: f64 },
    #[error("malformed matrix: {0}")]
    Malformed(String),
}
