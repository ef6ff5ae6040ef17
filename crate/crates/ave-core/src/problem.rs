//! Absolute value equation instances and the sign-diagonal Jacobian action.
//!
//! An instance is the data of `A x - |x| = b`. The residual map is
//! `F(x) = A x - |x| - b` and the generalized Jacobian element used by the
//! Newton methods is `A - D(x)` with `D(x) = diag(sgn(x))`. All types are
//! immutable after construction and safe to share across threads.

use crate::error::{AveError, Result};
use crate::linalg::csr::{spmv, CsrMatrix};
use crate::linalg::lsqr::LinearOperator;
use crate::linalg::vec_ops::{norm2, CompensatedSum};

/// One absolute value equation `A x - |x| = b` with optional metadata.
#[derive(Debug, Clone)]
pub struct AveProblem {
    a_matrix: CsrMatrix,
    rhs: Vec<f64>,
    planted_solution: Option<Vec<f64>>,
    theta_hint: Option<f64>,
    sv_min: Option<f64>,
    sv_max: Option<f64>,
    seed: Option<u64>,
}

impl AveProblem {
    /// Validates that `a` is square and matches `b`; empty problems are
    /// rejected.
    pub fn new(a: CsrMatrix, b: Vec<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(AveError::InvalidProblem(format!(
                "matrix must be square, got {}x{}",
                a.n_rows(),
                a.n_cols()
            )));
        }
        if a.n_rows() == 0 {
            return Err(AveError::InvalidProblem("dimension must be at least 1".into()));
        }
        if b.len() != a.n_rows() {
            return Err(AveError::DimensionMismatch {
                expected: a.n_rows(),
                found: b.len(),
            });
        }
        Ok(AveProblem {
            a_matrix: a,
            rhs: b,
            planted_solution: None,
            theta_hint: None,
            sv_min: None,
            sv_max: None,
            seed: None,
        })
    }

    /// Attach a known solution; its residual must vanish to within
    /// `1e-10 * max(1, ‖b‖₂)`.
    pub fn with_planted_solution(mut self, x_star: Vec<f64>) -> Result<Self> {
        if x_star.len() != self.n() {
            return Err(AveError::DimensionMismatch {
                expected: self.n(),
                found: x_star.len(),
            });
        }
        let res = residual_raw(&self.a_matrix, &self.rhs, &x_star)?;
        let tol = 1e-10 * norm2(&self.rhs).max(1.0);
        let rnorm = norm2(&res);
        if rnorm > tol {
            return Err(AveError::InvalidProblem(format!(
                "planted solution residual {rnorm:.3e} exceeds {tol:.3e}"
            )));
        }
        self.planted_solution = Some(x_star);
        Ok(self)
    }

    pub fn with_theta_hint(mut self, theta: f64) -> Result<Self> {
        if theta < 0.0 {
            return Err(AveError::InvalidProblem("theta hint must be nonnegative".into()));
        }
        self.theta_hint = Some(theta);
        Ok(self)
    }

    pub fn with_singular_value_bounds(mut self, sv_min: f64, sv_max: f64) -> Result<Self> {
        if sv_min <= 0.0 {
            return Err(AveError::InvalidProblem("sv_min must be positive".into()));
        }
        if sv_max < sv_min {
            return Err(AveError::InvalidProblem("sv_max must be at least sv_min".into()));
        }
        self.sv_min = Some(sv_min);
        self.sv_max = Some(sv_max);
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn n(&self) -> usize {
        self.a_matrix.n_rows()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.a_matrix
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn planted_solution(&self) -> Option<&[f64]> {
        self.planted_solution.as_deref()
    }

    pub fn theta_hint(&self) -> Option<f64> {
        self.theta_hint
    }

    pub fn sv_min(&self) -> Option<f64> {
        self.sv_min
    }

    pub fn sv_max(&self) -> Option<f64> {
        self.sv_max
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
}

/// The diagonal of `D(x) = diag(sgn(x))`, entries in `{-1, 0, +1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignVector {
    signs: Vec<i8>,
}

impl SignVector {
    pub fn from_signs(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|s| !(-1..=1).contains(s)) {
            return Err(AveError::InvalidProblem("sign entries must be -1, 0 or 1".into()));
        }
        Ok(SignVector { signs })
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Elementwise product `D(x) v`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.signs.len() {
            return Err(AveError::DimensionMismatch {
                expected: self.signs.len(),
                found: v.len(),
            });
        }
        Ok(self
            .signs
            .iter()
            .zip(v)
            .map(|(&s, &x)| match s {
                1 => x,
                -1 => -x,
                _ => 0.0,
            })
            .collect())
    }

    /// Diagonal of `D` as floats, for materializing `A - D`.
    pub fn as_f64(&self) -> Vec<f64> {
        self.signs.iter().map(|&s| s as f64).collect()
    }
}

/// Componentwise sign of `x`: -1, 0 or +1 for negative, zero, positive.
pub fn sign_of(x: &[f64]) -> SignVector {
    SignVector {
        signs: x
            .iter()
            .map(|&v| {
                if v > 0.0 {
                    1
                } else if v < 0.0 {
                    -1
                } else {
                    0
                }
            })
            .collect(),
    }
}

/// Residual `F(x) = A x - |x| - b`, computed with one sparse pass per row.
///
/// Accumulation is compensated: near a solution the terms cancel to far
/// below `eps * |A| |x|`, and the stopping rules need the residual norm to
/// stay meaningful there.
pub fn residual(p: &AveProblem, x: &[f64]) -> Result<Vec<f64>> {
    residual_raw(&p.a_matrix, &p.rhs, x)
}

fn residual_raw(a: &CsrMatrix, b: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != a.n_cols() {
        return Err(AveError::DimensionMismatch {
            expected: a.n_cols(),
            found: x.len(),
        });
    }
    let mut out = vec![0.0; a.n_rows()];
    for (i, slot) in out.iter_mut().enumerate() {
        let (cols, vals) = a.row(i);
        let mut acc = CompensatedSum::new();
        for (&c, &v) in cols.iter().zip(vals) {
            acc.add_product(v, x[c]);
        }
        acc.add(-x[i].abs());
        acc.add(-b[i]);
        *slot = acc.total();
    }
    Ok(out)
}

/// Matrix-free action `(A - D) v = A v - s ⊙ v`; `A - D` is never formed.
pub fn newton_operator_apply(p: &AveProblem, s: &SignVector, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != p.n() {
        return Err(AveError::DimensionMismatch {
            expected: p.n(),
            found: v.len(),
        });
    }
    if s.len() != p.n() {
        return Err(AveError::DimensionMismatch {
            expected: p.n(),
            found: s.len(),
        });
    }
    let mut out = spmv(&p.a_matrix, v)?;
    for (i, &sign) in s.signs.iter().enumerate() {
        match sign {
            1 => out[i] -= v[i],
            -1 => out[i] += v[i],
            _ => {}
        }
    }
    Ok(out)
}

/// Matrix-free `A - D(x)` for the iterative inner solver.
pub struct NewtonOperator<'a> {
    a: &'a CsrMatrix,
    signs: &'a SignVector,
}

impl<'a> NewtonOperator<'a> {
    pub fn new(a: &'a CsrMatrix, signs: &'a SignVector) -> Self {
        NewtonOperator { a, signs }
    }
}

impl LinearOperator for NewtonOperator<'_> {
    fn n_rows(&self) -> usize {
        self.a.n_rows()
    }

    fn n_cols(&self) -> usize {
        self.a.n_cols()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&spmv(self.a, v).expect("dimensions checked by caller"));
        for (i, &s) in self.signs.signs().iter().enumerate() {
            match s {
                1 => out[i] -= v[i],
                -1 => out[i] += v[i],
                _ => {}
            }
        }
    }

    fn apply_transpose(&self, v: &[f64], out: &mut [f64]) {
        // D is diagonal, so (A - D)ᵀ = Aᵀ - D.
        out.copy_from_slice(
            &crate::linalg::csr::spmv_transpose(self.a, v).expect("dimensions checked by caller"),
        );
        for (i, &s) in self.signs.signs().iter().enumerate() {
            match s {
                1 => out[i] -= v[i],
                -1 => out[i] += v[i],
                _ => {}
            }
        }
    }

    fn residual_of(&self, x: &[f64], rhs: &[f64], out: &mut [f64]) {
        for (i, slot) in out.iter_mut().enumerate() {
            let (cols, vals) = self.a.row(i);
            let mut acc = CompensatedSum::new();
            acc.add(rhs[i]);
            for (&c, &v) in cols.iter().zip(vals) {
                acc.add_product(-v, x[c]);
            }
            match self.signs.signs()[i] {
                1 => acc.add(x[i]),
                -1 => acc.add(-x[i]),
                _ => {}
            }
            *slot = acc.total();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vec_ops::norm_inf;
    use proptest::prelude::*;

    fn fixture_4i() -> AveProblem {
        AveProblem::new(CsrMatrix::from_diag(&[4.0, 4.0]), vec![1.0, 1.0]).unwrap()
    }

    fn fixture_oscillating() -> AveProblem {
        let a = CsrMatrix::from_dense(2, 2, &[1.0, -1.0, 3.0, -1.0]).unwrap();
        AveProblem::new(a, vec![-1.0, -3.0]).unwrap()
    }

    #[test]
    fn sign_of_basic() {
        assert_eq!(sign_of(&[2.0, 0.0, -5.0]).signs(), &[1, 0, -1]);
        assert_eq!(sign_of(&[0.0, 0.0]).signs(), &[0, 0]);
    }

    #[test]
    fn sign_apply_recovers_abs() {
        let x = [-3.0, 4.0];
        let s = sign_of(&x);
        assert_eq!(s.apply(&x).unwrap(), vec![3.0, 4.0]);
    }

    #[test]
    fn residual_at_solution_of_scaled_identity() {
        let p = fixture_4i();
        let r = residual(&p, &[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!(norm_inf(&r) < 1e-15, "residual {r:?}");
    }

    #[test]
    fn residual_at_zero_is_minus_b() {
        let p = fixture_oscillating();
        assert_eq!(residual(&p, &[0.0, 0.0]).unwrap(), vec![1.0, 3.0]);
    }

    #[test]
    fn residual_hand_evaluated() {
        let p = fixture_oscillating();
        assert_eq!(residual(&p, &[1.0, 3.0]).unwrap(), vec![-2.0, 0.0]);
    }

    #[test]
    fn residual_dimension_mismatch() {
        let p = fixture_4i();
        assert!(residual(&p, &[1.0]).is_err());
    }

    #[test]
    fn newton_apply_zero_sign_is_plain_product() {
        let p = fixture_oscillating();
        let s = sign_of(&[0.0, 0.0]);
        let v = [1.0, 3.0];
        assert_eq!(
            newton_operator_apply(&p, &s, &v).unwrap(),
            spmv(p.matrix(), &v).unwrap()
        );
    }

    #[test]
    fn newton_apply_scaled_identity() {
        let p = fixture_4i();
        let s = SignVector::from_signs(vec![1, 1]).unwrap();
        assert_eq!(
            newton_operator_apply(&p, &s, &[1.0, 1.0]).unwrap(),
            vec![3.0, 3.0]
        );
    }

    #[test]
    fn newton_apply_hand_evaluated() {
        let p = fixture_oscillating();
        let s = sign_of(&[1.0, 3.0]);
        assert_eq!(
            newton_operator_apply(&p, &s, &[1.0, 3.0]).unwrap(),
            vec![-3.0, -3.0]
        );
    }

    #[test]
    fn operator_transpose_matches_shifted_matrix() {
        let p = fixture_oscillating();
        let s = sign_of(&[-2.0, 5.0]);
        let shifted = p.matrix().with_diagonal_shift(&s.as_f64()).unwrap();
        let op = NewtonOperator::new(p.matrix(), &s);
        let v = [0.7, -1.3];
        let mut out = [0.0; 2];
        op.apply_transpose(&v, &mut out);
        let expect = crate::linalg::csr::spmv_transpose(&shifted, &v).unwrap();
        // summation order differs between the matrix-free and materialized paths
        for (a, b) in out.iter().zip(&expect) {
            assert!((a - b).abs() <= 1e-14 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn planted_solution_is_validated() {
        let p = fixture_oscillating();
        assert!(p.clone().with_planted_solution(vec![-1.0, -1.0]).is_ok());
        assert!(matches!(
            p.with_planted_solution(vec![5.0, 5.0]),
            Err(AveError::InvalidProblem(_))
        ));
    }

    #[test]
    fn zero_dimension_rejected() {
        let err = AveProblem::new(CsrMatrix::from_coo(0, 0, &[]).unwrap(), vec![]).unwrap_err();
        assert!(matches!(err, AveError::InvalidProblem(_)));
    }

    proptest! {
        // residual(p, x) = (A - D(x)) x - b, using D(x) x = |x|
        #[test]
        fn residual_equals_operator_identity(xs in proptest::collection::vec(-50.0f64..50.0, 2)) {
            let p = fixture_oscillating();
            let s = sign_of(&xs);
            let lhs = residual(&p, &xs).unwrap();
            let rhs: Vec<f64> = newton_operator_apply(&p, &s, &xs)
                .unwrap()
                .iter()
                .zip(p.rhs())
                .map(|(a, b)| a - b)
                .collect();
            for (l, r) in lhs.iter().zip(&rhs) {
                prop_assert!((l - r).abs() <= 1e-12 * (1.0 + r.abs()));
            }
        }

        // sign is invariant under positive scaling, including zero entries
        #[test]
        fn sign_scale_invariance(
            xs in proptest::collection::vec(prop_oneof![Just(0.0f64), -100.0f64..100.0], 1..8),
            c in 1e-6f64..1e6,
        ) {
            let scaled: Vec<f64> = xs.iter().map(|x| c * x).collect();
            let plain = sign_of(&xs);
            let rescaled = sign_of(&scaled);
            prop_assert_eq!(plain.signs(), rescaled.signs());
        }

        // ‖D(x) v‖∞ ≤ ‖v‖∞
        #[test]
        fn sign_apply_is_nonexpansive(
            xs in proptest::collection::vec(-10.0f64..10.0, 5),
            vs in proptest::collection::vec(-10.0f64..10.0, 5),
        ) {
            let s = sign_of(&xs);
            prop_assert!(norm_inf(&s.apply(&vs).unwrap()) <= norm_inf(&vs));
        }
    }
}
