//! Extreme singular value estimation.
//!
//! The largest singular value comes from matrix-free power iteration on
//! `AᵀA`; the smallest from inverse power iteration solving `AᵀA w = v`
//! with a dense LU factorization computed once. Start vectors are drawn
//! from a seeded stream so repeated verification runs are reproducible.

use crate::error::{AveError, Result};
use crate::linalg::csr::{spmv, spmv_transpose, CsrMatrix};
use crate::linalg::dense::LuFactors;
use crate::linalg::vec_ops::{dot, norm2};
use crate::rng::Rng;

/// Estimate `(sv_max, sv_min)` to relative tolerance `tol`.
///
/// Errors if either iteration fails to settle within `max_iter` steps or if
/// the matrix is numerically singular (inverse iteration cannot factor
/// `AᵀA`).
pub fn extreme_singular_values(
    m: &CsrMatrix,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let rng = Rng::from_seed(seed);
    let sv_max = largest_singular_value(m, tol, max_iter, rng.split(0))?;
    let sv_min = smallest_singular_value(m, tol, max_iter, rng.split(1))?;
    Ok((sv_max, sv_min))
}

/// `‖A⁻¹‖₂ = 1 / sv_min`.
pub fn inverse_norm_2(m: &CsrMatrix, seed: u64) -> Result<f64> {
    let rng = Rng::from_seed(seed);
    let sv_min = smallest_singular_value(m, 1e-10, 200_000, rng.split(1))?;
    Ok(1.0 / sv_min)
}

/// Largest singular value by power iteration on `AᵀA`, matrix-free.
pub fn largest_singular_value(
    m: &CsrMatrix,
    tol: f64,
    max_iter: usize,
    mut rng: Rng,
) -> Result<f64> {
    if !m.is_square() {
        return Err(AveError::InvalidMatrix(
            "singular value estimation needs a square matrix".into(),
        ));
    }
    let n = m.n_rows();
    if n == 0 {
        return Err(AveError::InvalidMatrix("empty matrix".into()));
    }
    let mut v = random_unit_vector(n, &mut rng);
    let mut lambda_prev = f64::NAN;
    for _ in 0..max_iter {
        let av = spmv(m, &v).expect("square dims");
        let atav = spmv_transpose(m, &av).expect("square dims");
        // Rayleigh quotient of AᵀA at the unit vector v
        let lambda = dot(&v, &atav);
        let norm = norm2(&atav);
        if norm == 0.0 {
            return Ok(0.0); // v in the null space and A v = 0: sv_max of a zero direction
        }
        for i in 0..n {
            v[i] = atav[i] / norm;
        }
        if lambda_prev.is_finite() && (lambda - lambda_prev).abs() <= tol * lambda.abs() {
            return Ok(lambda.max(0.0).sqrt());
        }
        lambda_prev = lambda;
    }
    Err(AveError::NoConvergence {
        what: "power iteration for the largest singular value".into(),
        max_iter,
    })
}

/// Smallest singular value by inverse power iteration on `AᵀA` using
/// repeated dense LU solves.
pub fn smallest_singular_value(
    m: &CsrMatrix,
    tol: f64,
    max_iter: usize,
    mut rng: Rng,
) -> Result<f64> {
    if !m.is_square() {
        return Err(AveError::InvalidMatrix(
            "singular value estimation needs a square matrix".into(),
        ));
    }
    let n = m.n_rows();
    if n == 0 {
        return Err(AveError::InvalidMatrix("empty matrix".into()));
    }
    let ata = gram_dense(m);
    let lu = LuFactors::factor(ata, n)
        .map_err(|_| AveError::SingularMatrix("AᵀA is numerically singular".into()))?;
    let mut v = random_unit_vector(n, &mut rng);
    let mut mu_prev = f64::NAN;
    for _ in 0..max_iter {
        let w = lu.solve(&v)?;
        // With v normalized, mu = vᵀw estimates 1/λ_min(AᵀA).
        let mu = dot(&v, &w);
        if !mu.is_finite() || mu <= 0.0 {
            return Err(AveError::SingularMatrix(
                "inverse iteration produced a non-positive Rayleigh quotient".into(),
            ));
        }
        let norm = norm2(&w);
        for i in 0..n {
            v[i] = w[i] / norm;
        }
        if mu_prev.is_finite() && (mu - mu_prev).abs() <= tol * mu {
            return Ok((1.0 / mu).sqrt());
        }
        mu_prev = mu;
    }
    Err(AveError::NoConvergence {
        what: "inverse iteration for the smallest singular value".into(),
        max_iter,
    })
}

/// Dense `AᵀA`, accumulated row by row from the sparse pattern.
fn gram_dense(m: &CsrMatrix) -> Vec<f64> {
    let n = m.n_cols();
    let mut ata = vec![0.0; n * n];
    for r in 0..m.n_rows() {
        let (cols, vals) = m.row(r);
        for (idx, (&ci, &vi)) in cols.iter().zip(vals).enumerate() {
            // symmetric: fill both triangles from the upper pairs
            ata[ci * n + ci] += vi * vi;
            for (&cj, &vj) in cols[idx + 1..].iter().zip(&vals[idx + 1..]) {
                let prod = vi * vj;
                ata[ci * n + cj] += prod;
                ata[cj * n + ci] += prod;
            }
        }
    }
    ata
}

fn random_unit_vector(n: usize, rng: &mut Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.range_f64(-1.0, 1.0)).collect();
        let norm = norm2(&v);
        if norm > 1e-3 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
