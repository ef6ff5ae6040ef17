//! Dense LU factorization with partial pivoting.
//!
//! Used by the exact Newton step, by inverse iteration for the smallest
//! singular value, and by the explicit-inverse paths of the one- and
//! infinity-norm bound computations. Matrices are densified copies of CSR
//! inputs; there is no sparse factorization here.

use crate::error::{AveError, Result};
use crate::linalg::csr::CsrMatrix;
use crate::linalg::lsqr::LinearOperator;

/// LU factors of a square matrix, stored packed in one row-major array.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

impl LuFactors {
    /// Factor a row-major `n x n` matrix in place. Pivots whose magnitude is
    /// at or below `n * eps * max|a_ij|` signal numerical singularity.
    pub fn factor(mut a: Vec<f64>, n: usize) -> Result<LuFactors> {
        if a.len() != n * n {
            return Err(AveError::DimensionMismatch {
                expected: n * n,
                found: a.len(),
            });
        }
        let scale = a.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        if scale == 0.0 && n > 0 {
            return Err(AveError::SingularMatrix("zero matrix".into()));
        }
        let tiny = n as f64 * f64::EPSILON * scale;
        let mut piv = Vec::with_capacity(n);
        for k in 0..n {
            let mut p = k;
            let mut best = a[k * n + k].abs();
            for i in k + 1..n {
                let cand = a[i * n + k].abs();
                if cand > best {
                    best = cand;
                    p = i;
                }
            }
            if best <= tiny {
                return Err(AveError::SingularMatrix(format!(
                    "pivot {best:.3e} at column {k} below threshold {tiny:.3e}"
                )));
            }
            piv.push(p);
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
            }
            let pivot = a[k * n + k];
            let (top, rest) = a.split_at_mut((k + 1) * n);
            let pivot_row = &top[k * n + k + 1..k * n + n];
            for i in 0..n - k - 1 {
                let row = &mut rest[i * n..i * n + n];
                let factor = row[k] / pivot;
                row[k] = factor;
                for (x, y) in row[k + 1..n].iter_mut().zip(pivot_row) {
                    *x -= factor * y;
                }
            }
        }
        Ok(LuFactors { n, lu: a, piv })
    }

    /// Solve `A x = b` using the stored factors.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(AveError::DimensionMismatch {
                expected: self.n,
                found: b.len(),
            });
        }
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
        }
        // forward substitution with unit lower triangle
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        // back substitution
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        Ok(x)
    }

    /// Explicit inverse, column by column.
    pub fn inverse(&self) -> Result<Vec<f64>> {
        let n = self.n;
        let mut inv = vec![0.0; n * n];
        let mut e = vec![0.0; n];
        for c in 0..n {
            e[c] = 1.0;
            let col = self.solve(&e)?;
            e[c] = 0.0;
            for r in 0..n {
                inv[r * n + c] = col[r];
            }
        }
        Ok(inv)
    }
}

/// Solve `m · x = b` by dense LU with partial pivoting on a densified copy,
/// followed by one step of iterative refinement against the sparse matrix.
/// Refinement pushes the true residual well below the factorization's
/// backward error, which matters at large `|A| |x|` scales where that
/// backward error alone would exceed the outer stopping tolerance.
pub fn dense_lu_solve(m: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(AveError::InvalidMatrix(format!(
            "LU solve needs a square matrix, got {}x{}",
            m.n_rows(),
            m.n_cols()
        )));
    }
    if b.len() != m.n_rows() {
        return Err(AveError::DimensionMismatch {
            expected: m.n_rows(),
            found: b.len(),
        });
    }
    let lu = LuFactors::factor(m.to_dense(), m.n_rows())?;
    let mut x = lu.solve(b)?;
    let mut r = vec![0.0; b.len()];
    m.residual_of(&x, b, &mut r);
    let correction = lu.solve(&r)?;
    for (xi, di) in x.iter_mut().zip(&correction) {
        *xi += di;
    }
    Ok(x)
}
