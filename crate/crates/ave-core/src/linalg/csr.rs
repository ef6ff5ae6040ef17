//! Compressed sparse row matrices and their products.
//!
//! The only large-matrix representation in the crate. Matrices are canonical:
//! within each row the column indices are strictly increasing and duplicates
//! are rejected at construction.

use crate::error::{AveError, Result};

/// Sparse matrix in CSR form with `f64` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Build from raw CSR arrays, validating the canonical-form invariants.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        vals: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != n_rows + 1 {
            return Err(AveError::InvalidMatrix(format!(
                "row_ptr length {} != n_rows + 1 = {}",
                row_ptr.len(),
                n_rows + 1
            )));
        }
        if col_idx.len() != vals.len() {
            return Err(AveError::InvalidMatrix(format!(
                "col_idx length {} != vals length {}",
                col_idx.len(),
                vals.len()
            )));
        }
        if row_ptr[0] != 0 || row_ptr[n_rows] != col_idx.len() {
            return Err(AveError::InvalidMatrix(
                "row_ptr must start at 0 and end at nnz".into(),
            ));
        }
        for r in 0..n_rows {
            if row_ptr[r] > row_ptr[r + 1] {
                return Err(AveError::InvalidMatrix(format!(
                    "row_ptr decreases at row {r}"
                )));
            }
            let cols = &col_idx[row_ptr[r]..row_ptr[r + 1]];
            for w in cols.windows(2) {
                if w[0] >= w[1] {
                    return Err(AveError::InvalidMatrix(format!(
                        "columns not strictly increasing in row {r}"
                    )));
                }
            }
            if let Some(&last) = cols.last() {
                if last >= n_cols {
                    return Err(AveError::InvalidMatrix(format!(
                        "column index {last} out of bounds in row {r}"
                    )));
                }
            }
        }
        Ok(CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            vals,
        })
    }

    /// Build from coordinate triplets. Duplicate positions are an error.
    pub fn from_coo(n_rows: usize, n_cols: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<&(usize, usize, f64)> = entries.iter().collect();
        sorted.sort_by_key(|(r, c, _)| (*r, *c));
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut vals = Vec::with_capacity(entries.len());
        let mut prev: Option<(usize, usize)> = None;
        for &&(r, c, v) in &sorted {
            if r >= n_rows || c >= n_cols {
                return Err(AveError::InvalidMatrix(format!(
                    "entry ({r}, {c}) out of bounds for {n_rows}x{n_cols}"
                )));
            }
            if prev == Some((r, c)) {
                return Err(AveError::InvalidMatrix(format!(
                    "duplicate entry at ({r}, {c})"
                )));
            }
            prev = Some((r, c));
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            vals.push(v);
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix::new(n_rows, n_cols, row_ptr, col_idx, vals)
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            vals: vec![1.0; n],
        }
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        CsrMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            vals: diag.to_vec(),
        }
    }

    /// Build from a row-major dense array, dropping exact zeros.
    pub fn from_dense(n_rows: usize, n_cols: usize, dense: &[f64]) -> Result<Self> {
        if dense.len() != n_rows * n_cols {
            return Err(AveError::DimensionMismatch {
                expected: n_rows * n_cols,
                found: dense.len(),
            });
        }
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for r in 0..n_rows {
            for c in 0..n_cols {
                let v = dense[r * n_cols + c];
                if v != 0.0 {
                    col_idx.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            vals,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Fraction of stored entries relative to a full matrix.
    pub fn density(&self) -> f64 {
        if self.n_rows == 0 || self.n_cols == 0 {
            return 0.0;
        }
        self.nnz() as f64 / (self.n_rows as f64 * self.n_cols as f64)
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        (&self.col_idx[lo..hi], &self.vals[lo..hi])
    }

    /// Iterate stored entries as `(row, col, value)` in row-major order.
    pub fn iter_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.n_rows * self.n_cols];
        for (r, c, v) in self.iter_entries() {
            dense[r * self.n_cols + c] = v;
        }
        dense
    }

    /// Copy of `self` with `shift[i]` subtracted from diagonal entry `(i, i)`,
    /// inserting explicit diagonal entries where the pattern lacks them.
    /// This materializes `A - D` for direct factorization.
    pub fn with_diagonal_shift(&self, shift: &[f64]) -> Result<CsrMatrix> {
        if !self.is_square() {
            return Err(AveError::InvalidMatrix("diagonal shift needs a square matrix".into()));
        }
        if shift.len() != self.n_rows {
            return Err(AveError::DimensionMismatch {
                expected: self.n_rows,
                found: shift.len(),
            });
        }
        let mut row_ptr = Vec::with_capacity(self.n_rows + 1);
        let mut col_idx = Vec::with_capacity(self.nnz() + self.n_rows);
        let mut vals = Vec::with_capacity(self.nnz() + self.n_rows);
        row_ptr.push(0);
        for r in 0..self.n_rows {
            let (cols, rvals) = self.row(r);
            let mut placed = false;
            for (&c, &v) in cols.iter().zip(rvals) {
                if c == r {
                    col_idx.push(c);
                    vals.push(v - shift[r]);
                    placed = true;
                } else {
                    if !placed && c > r && shift[r] != 0.0 {
                        col_idx.push(r);
                        vals.push(-shift[r]);
                        placed = true;
                    }
                    col_idx.push(c);
                    vals.push(v);
                }
            }
            if !placed && shift[r] != 0.0 {
                // all stored columns were < r
                col_idx.push(r);
                vals.push(-shift[r]);
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix::new(self.n_rows, self.n_cols, row_ptr, col_idx, vals)
    }

    /// One-norm (max absolute column sum) or infinity-norm (max absolute row
    /// sum).
    pub fn matrix_norm(&self, kind: AbsNormKind) -> f64 {
        match kind {
            AbsNormKind::One => {
                let mut col_sums = vec![0.0; self.n_cols];
                for (_, c, v) in self.iter_entries() {
                    col_sums[c] += v.abs();
                }
                col_sums.into_iter().fold(0.0, f64::max)
            }
            AbsNormKind::Inf => (0..self.n_rows)
                .map(|r| self.row(r).1.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max),
        }
    }
}

/// Norm kinds with entrywise-sum formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbsNormKind {
    One,
    Inf,
}

/// Sparse matrix-vector product `m · v`.
pub fn spmv(m: &CsrMatrix, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != m.n_cols {
        return Err(AveError::DimensionMismatch {
            expected: m.n_cols,
            found: v.len(),
        });
    }
    let mut out = vec![0.0; m.n_rows];
    for r in 0..m.n_rows {
        let (cols, vals) = m.row(r);
        let mut acc = 0.0;
        for (&c, &val) in cols.iter().zip(vals) {
            acc += val * v[c];
        }
        out[r] = acc;
    }
    Ok(out)
}

/// Transposed product `mᵀ · v` without forming the transpose.
pub fn spmv_transpose(m: &CsrMatrix, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != m.n_rows {
        return Err(AveError::DimensionMismatch {
            expected: m.n_rows,
            found: v.len(),
        });
    }
    let mut out = vec![0.0; m.n_cols];
    for r in 0..m.n_rows {
        let (cols, vals) = m.row(r);
        let vr = v[r];
        for (&c, &val) in cols.iter().zip(vals) {
            out[c] += val * vr;
        }
    }
    Ok(out)
}
