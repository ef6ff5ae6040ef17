//! Shared test oracles, independent of the library's computational paths.

// each test binary pulls in the subset it needs
#![allow(dead_code)]

use ave_core::linalg::csr::CsrMatrix;

/// All singular values of a dense row-major `n x n` matrix by one-sided
/// Jacobi orthogonalization. Column norms of the converged product are the
/// singular values. Intended for `n ≤ 50`.
pub fn jacobi_singular_values(dense: &[f64], n: usize) -> Vec<f64> {
    assert_eq!(dense.len(), n * n);
    // column-major working copy: columns are orthogonalized in place
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|c| (0..n).map(|r| dense[r * n + c]).collect())
        .collect();
    let tol = 1e-28;
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq: f64 = (0..n).map(|k| a[p][k] * a[q][k]).sum();
                let app: f64 = (0..n).map(|k| a[p][k] * a[p][k]).sum();
                let aqq: f64 = (0..n).map(|k| a[q][k] * a[q][k]).sum();
                if apq * apq <= tol * app * aqq {
                    continue;
                }
                rotated = true;
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..n {
                    let vp = a[p][k];
                    let vq = a[q][k];
                    a[p][k] = c * vp - s * vq;
                    a[q][k] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut svs: Vec<f64> = a
        .iter()
        .map(|col| col.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    svs.sort_by(|x, y| y.partial_cmp(x).unwrap());
    svs
}

/// Largest and smallest singular values via the Jacobi oracle.
pub fn jacobi_extremes(m: &CsrMatrix) -> (f64, f64) {
    let n = m.n_rows();
    let svs = jacobi_singular_values(&m.to_dense(), n);
    (svs[0], svs[n - 1])
}

/// Invert a small dense matrix by Gauss-Jordan elimination with partial
/// pivoting. Returns `None` for numerically singular inputs.
pub fn gauss_jordan_inverse(dense: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut a = dense.to_vec();
    let mut inv: Vec<f64> = (0..n * n)
        .map(|i| if i % (n + 1) == 0 { 1.0 } else { 0.0 })
        .collect();
    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|r| (r, a[r * n + k].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())?;
        if pivot <= n as f64 * f64::EPSILON * max_abs(&a) {
            return None;
        }
        for c in 0..n {
            a.swap(k * n + c, p * n + c);
            inv.swap(k * n + c, p * n + c);
        }
        let d = a[k * n + k];
        for c in 0..n {
            a[k * n + c] /= d;
            inv[k * n + c] /= d;
        }
        for r in 0..n {
            if r == k {
                continue;
            }
            let f = a[r * n + k];
            if f == 0.0 {
                continue;
            }
            for c in 0..n {
                a[r * n + c] -= f * a[k * n + c];
                inv[r * n + c] -= f * inv[k * n + c];
            }
        }
    }
    Some(inv)
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
}

/// Max absolute row sum of a dense row-major matrix.
pub fn dense_inf_norm(dense: &[f64], n: usize) -> f64 {
    (0..n)
        .map(|r| dense[r * n..(r + 1) * n].iter().map(|v| v.abs()).sum())
        .fold(0.0, f64::max)
}
