// Negated comparisons reject NaN parameters, and index loops mirror the
// subscript form of the kernels; both are intentional.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

//! Sparse iterative-solver laboratory.
//!
//! The crate bundles everything needed to study how information moves through
//! sparse linear solves: CSR storage and kernels, finite-difference model
//! problems with closed-form solutions, instrumented CG / GMRES / stationary
//! solvers, hierarchical multilevel preconditioning, and diagnostics that
//! track residual histories, pointwise probe errors and the bitwise-exact
//! information front against graph-distance lower bounds.

pub mod csr;
pub mod dense;
pub mod diagnostics;
pub mod eigen;
pub mod error;
pub mod graph;
pub mod kernels;
pub mod market;
pub mod precond;
pub mod problems;
pub mod solvers;

pub use csr::CsrMatrix;
pub use dense::DenseMatrix;
pub use eigen::SpectrumEstimate;
pub use error::{Error, Result};
pub use problems::ProblemInstance;
pub use solvers::{IterationRecord, SolveReport, SolverConfig};
