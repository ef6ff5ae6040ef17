//! Random problem generation with prescribed singular values.
//!
//! An instance is built by (1) drawing singular values `rc` uniformly from
//! `(0, 1)`, (2) rescaling them by `3 / (u · min(rc))` with `u ~ U(0, 1)` so
//! the smallest singular value becomes `3/u > 3` and `‖A⁻¹‖₂ < 1/3` holds
//! by construction, (3) applying random Givens plane rotations alternately
//! on the left and right of `diag(rc)` until the target density is reached
//! (orthogonal rotations preserve the singular values), and (4) planting a
//! solution `x_*` drawn uniformly from the solution range and setting
//! `b = A x_* - |x_*|`.
//!
//! All randomness comes from the instance seed through split streams, and
//! every floating-point operation (including the rotation cosines, which use
//! a rational half-angle parameterization instead of trig calls) is
//! IEEE-exact, so a spec regenerates bit-identical problems on any platform.

pub mod suite;

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{AveError, Result};
use crate::linalg::csr::CsrMatrix;
use crate::linalg::spmv;
use crate::problem::AveProblem;
use crate::rng::Rng;

pub use suite::{
    read_suite, write_suite, GeneratorParams, Suite, SuiteInstanceMeta, SuiteManifest,
    MANIFEST_FILE,
};

/// Parameters for one generated instance.
#[derive(Debug, Clone)]
pub struct GeneratorSpec {
    pub n: usize,
    /// Target fraction of nonzero entries, in `(0, 1]`.
    pub density: f64,
    pub seed: u64,
    /// Rescale singular values so the smallest exceeds 3 (on by default).
    pub sv_rescale: bool,
    /// Planted solution and start vectors are uniform on this interval.
    pub solution_range: (f64, f64),
    /// Optional spread factor for the raw singular values: each `rc` maps to
    /// `rc / (rc + s (1 - rc))`. Values `s > 1` widen the spectrum (larger
    /// condition numbers), `s < 1` compress it. `None` keeps the raw draw.
    pub rc_spread: Option<f64>,
}

impl GeneratorSpec {
    pub fn new(n: usize, density: f64, seed: u64) -> Result<Self> {
        let spec = GeneratorSpec {
            n,
            density,
            seed,
            sv_rescale: true,
            solution_range: (-100.0, 100.0),
            rc_spread: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(AveError::InvalidConfig("dimension must be at least 1".into()));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(AveError::InvalidConfig(format!(
                "density must lie in (0, 1], got {}",
                self.density
            )));
        }
        if !(self.solution_range.0 < self.solution_range.1) {
            return Err(AveError::InvalidConfig("solution range must be nonempty".into()));
        }
        if let Some(s) = self.rc_spread {
            if !(s > 0.0) {
                return Err(AveError::InvalidConfig("rc_spread must be positive".into()));
            }
        }
        Ok(())
    }
}

/// A generated problem plus the pieces that belong in the suite manifest
/// rather than the problem file.
#[derive(Debug, Clone)]
pub struct GeneratedInstance {
    pub problem: AveProblem,
    pub x0: Vec<f64>,
    pub achieved_density: f64,
    pub warnings: Vec<String>,
}

/// Generate one seeded instance.
pub fn generate(spec: &GeneratorSpec) -> Result<GeneratedInstance> {
    spec.validate()?;
    let n = spec.n;
    let root = Rng::from_seed(spec.seed);
    let mut warnings = Vec::new();

    // singular values
    let mut rc_stream = root.split(0);
    let mut rc: Vec<f64> = (0..n).map(|_| rc_stream.next_open01()).collect();
    if let Some(s) = spec.rc_spread {
        for v in rc.iter_mut() {
            *v = *v / (*v + s * (1.0 - *v));
        }
    }
    if spec.sv_rescale {
        let u = rc_stream.next_open01();
        let rc_min = rc.iter().cloned().fold(f64::INFINITY, f64::min);
        let factor = 3.0 / (u * rc_min);
        for v in rc.iter_mut() {
            *v *= factor;
        }
    }
    let sv_min = rc.iter().cloned().fold(f64::INFINITY, f64::min);
    let sv_max = rc.iter().cloned().fold(0.0, f64::max);

    // rotate diag(rc) up to the target density
    let matrix = rotate_to_density(&rc, spec, root.split(1), &mut warnings)?;
    let achieved_density = matrix.density();

    // planted solution, start point, right-hand side
    let (lo, hi) = spec.solution_range;
    let mut x_stream = root.split(2);
    let x_star: Vec<f64> = (0..n).map(|_| x_stream.range_f64(lo, hi)).collect();
    let mut x0_stream = root.split(3);
    let x0: Vec<f64> = (0..n).map(|_| x0_stream.range_f64(lo, hi)).collect();
    let ax = spmv(&matrix, &x_star)?;
    let b: Vec<f64> = ax.iter().zip(&x_star).map(|(a, x)| a - x.abs()).collect();

    let inv_norm = 1.0 / sv_min;
    let mut problem = AveProblem::new(matrix, b)?
        .with_planted_solution(x_star)?
        .with_singular_value_bounds(sv_min, sv_max)?
        .with_seed(spec.seed);
    if inv_norm < 1.0 / 3.0 {
        let theta = 0.9999 * (1.0 - 3.0 * inv_norm) / (inv_norm * (sv_max + 3.0));
        problem = problem.with_theta_hint(theta)?;
    }

    Ok(GeneratedInstance {
        problem,
        x0,
        achieved_density,
        warnings,
    })
}

/// Generate `count` instances with consecutive seeds `seed, seed+1, ...`.
pub fn generate_many(spec: &GeneratorSpec, count: usize) -> Result<Vec<GeneratedInstance>> {
    (0..count)
        .map(|i| {
            let mut s = spec.clone();
            s.seed = spec.seed.wrapping_add(i as u64);
            generate(&s)
        })
        .collect()
}

/// Sparse working form: per-row maps plus a per-column occupancy index so
/// both row and column rotations run in time proportional to the entries
/// they touch.
struct RotationWorkspace {
    rows: Vec<BTreeMap<usize, f64>>,
    col_rows: Vec<BTreeSet<usize>>,
    nnz: usize,
}

impl RotationWorkspace {
    fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (i, &v) in diag.iter().enumerate() {
            rows[i].insert(i, v);
            col_rows[i].insert(i);
        }
        RotationWorkspace {
            rows,
            col_rows,
            nnz: n,
        }
    }

    fn set(&mut self, r: usize, c: usize, v: f64) {
        if v == 0.0 {
            if self.rows[r].remove(&c).is_some() {
                self.col_rows[c].remove(&r);
                self.nnz -= 1;
            }
        } else if self.rows[r].insert(c, v).is_none() {
            self.col_rows[c].insert(r);
            self.nnz += 1;
        }
    }

    /// Mix rows `i` and `j` by the rotation `[c s; -s c]`.
    fn rotate_rows(&mut self, i: usize, j: usize, cos: f64, sin: f64) {
        let cols: Vec<usize> = self.rows[i]
            .keys()
            .chain(self.rows[j].keys())
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        for c in cols {
            let a = self.rows[i].get(&c).copied().unwrap_or(0.0);
            let b = self.rows[j].get(&c).copied().unwrap_or(0.0);
            self.set(i, c, cos * a + sin * b);
            self.set(j, c, cos * b - sin * a);
        }
    }

    /// Mix columns `p` and `q` by the rotation `[c s; -s c]`.
    fn rotate_cols(&mut self, p: usize, q: usize, cos: f64, sin: f64) {
        let rows: Vec<usize> = self.col_rows[p]
            .iter()
            .chain(self.col_rows[q].iter())
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        for r in rows {
            let a = self.rows[r].get(&p).copied().unwrap_or(0.0);
            let b = self.rows[r].get(&q).copied().unwrap_or(0.0);
            self.set(r, p, cos * a + sin * b);
            self.set(r, q, cos * b - sin * a);
        }
    }

    fn into_csr(self, n: usize) -> Result<CsrMatrix> {
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(self.nnz);
        let mut vals = Vec::with_capacity(self.nnz);
        row_ptr.push(0);
        for row in &self.rows {
            for (&c, &v) in row {
                col_idx.push(c);
                vals.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix::new(n, n, row_ptr, col_idx, vals)
    }
}

fn rotate_to_density(
    rc: &[f64],
    spec: &GeneratorSpec,
    mut rng: Rng,
    warnings: &mut Vec<String>,
) -> Result<CsrMatrix> {
    let n = rc.len();
    let mut ws = RotationWorkspace::from_diag(rc);

    if n == 1 {
        // the only orthogonal factors are ±1: draw a sign
        if rng.next_f64() < 0.5 {
            let v = ws.rows[0][&0];
            ws.set(0, 0, -v);
        }
        if spec.density < 1.0 {
            warnings.push(format!(
                "density {} unreachable for n = 1; emitting the densest achievable (1)",
                spec.density
            ));
        }
        return ws.into_csr(n);
    }

    let target_nnz = ((spec.density * (n * n) as f64).ceil() as usize).max(1);
    if target_nnz < n {
        warnings.push(format!(
            "target density {} needs fewer than n = {n} nonzeros; the diagonal already exceeds it",
            spec.density
        ));
    }

    let max_rotations = 200 * n + 4 * target_nnz;
    let stall_limit = 200 + n;
    let mut rotations = 0usize;
    let mut stall = 0usize;
    let mut left_side = true;

    while ws.nnz < target_nnz {
        if rotations >= max_rotations {
            warnings.push(format!(
                "stopped after {rotations} rotations at density {:.3e} (target {:.3e})",
                ws.nnz as f64 / (n * n) as f64,
                spec.density
            ));
            break;
        }
        let (i, j) = rng.index_pair(n);
        // rational half-angle parameterization: exactly reproducible, no trig
        let t = rng.range_f64(-1.0, 1.0);
        let t2 = t * t;
        let cos = (1.0 - t2) / (1.0 + t2);
        let sin = 2.0 * t / (1.0 + t2);
        let before = ws.nnz;
        if left_side {
            ws.rotate_rows(i, j, cos, sin);
        } else {
            ws.rotate_cols(i, j, cos, sin);
        }
        left_side = !left_side;
        rotations += 1;
        if ws.nnz > before {
            stall = 0;
        } else {
            stall += 1;
            if stall > stall_limit {
                warnings.push(format!(
                    "density stalled at {:.3e} after {rotations} rotations (target {:.3e})",
                    ws.nnz as f64 / (n * n) as f64,
                    spec.density
                ));
                break;
            }
        }
    }

    ws.into_csr(n)
}
