//! Solvers and tooling for systems of absolute value equations
//! `A x - |x| = b`.
//!
//! The equation is semi-smooth: `F(x) = A x - |x| - b` has the generalized
//! Jacobian element `A - D(x)` with `D(x) = diag(sgn(x))`, and both Newton
//! variants here iterate on the linear system `[A - D(x_k)] x_{k+1} = b`.
//! The exact method factors that system densely at every step; the inexact
//! method accepts any iterate whose linear residual is at most
//! `θ ‖F(x_k)‖₂`, produced by warm-started LSQR on the matrix-free
//! operator. When `‖A⁻¹‖₂ < 1/3` and θ stays under an explicit bound, the
//! iteration contracts Q-linearly; the `solver::bounds` and
//! `solver::verify` modules compute those bounds and check the hypotheses
//! behind them.
//!
//! The crate also ships a reproducible problem generator (random plane
//! rotations of a prescribed singular-value profile, seeded by a portable
//! counter-based RNG), suite serialization, and a benchmark harness with
//! Dolan-Moré performance profiles.
//!
//! # Example
//!
//! ```
//! use ave_core::linalg::csr::CsrMatrix;
//! use ave_core::problem::AveProblem;
//! use ave_core::solver::{exact_newton, SolverConfig};
//!
//! // 4x - |x| = 1 componentwise: unique solution x = 1/3
//! let p = AveProblem::new(CsrMatrix::from_diag(&[4.0, 4.0]), vec![1.0, 1.0]).unwrap();
//! let report = exact_newton(&p, &[1.0, 1.0], &SolverConfig::exact()).unwrap();
//! assert!(report.solved());
//! assert!((report.x_final[0] - 1.0 / 3.0).abs() < 1e-12);
//! ```

pub mod bench;
pub mod error;
pub mod generator;
pub mod io;
pub mod linalg;
pub mod problem;
pub mod rng;
pub mod solver;

pub use error::{AveError, Result};
pub use linalg::{CsrMatrix, NormKind};
pub use problem::{newton_operator_apply, residual, sign_of, AveProblem, SignVector};
pub use solver::{
    contraction_factor, exact_newton, inexact_newton, solve, theta_bound_global,
    theta_bound_signwise, verify_hypotheses, Method, SolveReport, SolveStatus, SolverConfig,
    ThetaChoice,
};
