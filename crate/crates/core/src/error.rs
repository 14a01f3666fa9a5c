//! Error type shared by all modules of the crate.

use crate::solvers::SolveReport;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("assembly: triplet ({row}, {col}) out of range for a {n_rows}x{n_cols} matrix")]
    TripletOutOfRange {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },

    #[error("{context}: dimension mismatch (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("matrix is not square ({n_rows}x{n_cols})")]
    NotSquare { n_rows: usize, n_cols: usize },

    #[error("matrix is not symmetric (max |a_ij - a_ji| = {max_diff:e} exceeds tol {tol:e})")]
    NotSymmetric { max_diff: f64, tol: f64 },

    #[error("matrix is not positive definite: {detail}")]
    NotSpd { detail: String },

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("source set is empty")]
    EmptySources,

    #[error("{context}: size {required} exceeds guard of {guard}")]
    SizeGuard {
        context: &'static str,
        required: usize,
        guard: usize,
    },

    #[error("zero diagonal entry in row {row}")]
    ZeroDiagonal { row: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("solver breakdown at iteration {iteration}: {detail}")]
    Breakdown {
        iteration: usize,
        detail: String,
        /// Telemetry collected up to the breakdown.
        report: Box<SolveReport>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
