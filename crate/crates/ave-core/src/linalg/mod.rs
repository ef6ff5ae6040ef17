//! Sparse kernels, direct and iterative solvers, and spectral estimators.

pub mod csr;
pub mod dense;
pub mod lsqr;
pub mod singular;
pub mod vec_ops;

pub use csr::{spmv, spmv_transpose, AbsNormKind, CsrMatrix};
pub use dense::{dense_lu_solve, LuFactors};
pub use lsqr::{lsqr, IterSolveStatus, LinearOperator};
pub use singular::{extreme_singular_values, inverse_norm_2};

/// Vector norm selector for the bound computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    One,
    Two,
    Inf,
}
