//! Problem files and trace export.
//!
//! Problems are stored as one self-describing JSON document holding the
//! matrix in coordinate form. Every real is written with 17 significant
//! decimal digits, which is enough for binary64 round trips to be
//! bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{AveError, Result};
use crate::linalg::csr::CsrMatrix;
use crate::problem::AveProblem;
use crate::solver::SolveReport;

/// Render a real with 17 significant digits (round-trip exact for f64).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_f64_array(vals: impl Iterator<Item = f64>) -> String {
    let mut out = String::from("[");
    for (i, v) in vals.enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_f64(v));
    }
    out.push(']');
    out
}

fn fmt_usize_array(vals: impl Iterator<Item = usize>) -> String {
    let mut out = String::from("[");
    for (i, v) in vals.enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v}");
    }
    out.push(']');
    out
}

/// Serialize a problem to its JSON document.
pub fn problem_to_json(p: &AveProblem) -> String {
    let m = p.matrix();
    let mut rows = Vec::with_capacity(m.nnz());
    let mut cols = Vec::with_capacity(m.nnz());
    let mut vals = Vec::with_capacity(m.nnz());
    for (r, c, v) in m.iter_entries() {
        rows.push(r);
        cols.push(c);
        vals.push(v);
    }
    let mut out = String::new();
    out.push_str("{\n");
    let _ = write!(out, "  \"n\": {},\n", p.n());
    out.push_str("  \"format\": \"coo\",\n");
    let _ = write!(out, "  \"rows\": {},\n", fmt_usize_array(rows.into_iter()));
    let _ = write!(out, "  \"cols\": {},\n", fmt_usize_array(cols.into_iter()));
    let _ = write!(out, "  \"vals\": {},\n", fmt_f64_array(vals.into_iter()));
    let _ = write!(out, "  \"b\": {}", fmt_f64_array(p.rhs().iter().copied()));
    if let Some(x_star) = p.planted_solution() {
        let _ = write!(out, ",\n  \"x_star\": {}", fmt_f64_array(x_star.iter().copied()));
    }
    if let Some(theta) = p.theta_hint() {
        let _ = write!(out, ",\n  \"theta\": {}", fmt_f64(theta));
    }
    if let Some(sv_min) = p.sv_min() {
        let _ = write!(out, ",\n  \"sv_min\": {}", fmt_f64(sv_min));
    }
    if let Some(sv_max) = p.sv_max() {
        let _ = write!(out, ",\n  \"sv_max\": {}", fmt_f64(sv_max));
    }
    if let Some(seed) = p.seed() {
        let _ = write!(out, ",\n  \"seed\": {seed}");
    }
    out.push_str("\n}\n");
    out
}

type JsonMap = serde_json::Map<String, serde_json::Value>;

fn parse_err(msg: impl std::fmt::Display) -> AveError {
    AveError::Parse(format!("problem file: {msg}"))
}

fn field<'a>(obj: &'a JsonMap, name: &str) -> Result<&'a serde_json::Value> {
    obj.get(name)
        .ok_or_else(|| parse_err(format_args!("missing field \"{name}\"")))
}

fn field_f64(v: &serde_json::Value, name: &str) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| parse_err(format_args!("field \"{name}\" must be a real number")))
}

fn field_u64(v: &serde_json::Value, name: &str) -> Result<u64> {
    v.as_u64()
        .ok_or_else(|| parse_err(format_args!("field \"{name}\" must be a nonnegative integer")))
}

fn field_array<'a>(obj: &'a JsonMap, name: &str) -> Result<&'a Vec<serde_json::Value>> {
    field(obj, name)?
        .as_array()
        .ok_or_else(|| parse_err(format_args!("field \"{name}\" must be an array")))
}

fn f64_array(obj: &JsonMap, name: &str) -> Result<Vec<f64>> {
    field_array(obj, name)?
        .iter()
        .map(|v| field_f64(v, name))
        .collect()
}

fn usize_array(obj: &JsonMap, name: &str) -> Result<Vec<usize>> {
    field_array(obj, name)?
        .iter()
        .map(|v| field_u64(v, name).map(|u| u as usize))
        .collect()
}

/// Parse a problem from its JSON document, validating every invariant.
/// Malformed content reports the offending field by name.
pub fn problem_from_json(text: &str) -> Result<AveProblem> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(parse_err)?;
    let obj = value
        .as_object()
        .ok_or_else(|| parse_err("top level must be an object"))?;

    let n = field_u64(field(obj, "n")?, "n")? as usize;
    let format = field(obj, "format")?
        .as_str()
        .ok_or_else(|| parse_err("field \"format\" must be a string"))?;
    if format != "coo" {
        return Err(parse_err(format_args!("unsupported format \"{format}\"")));
    }
    let rows = usize_array(obj, "rows")?;
    let cols = usize_array(obj, "cols")?;
    let vals = f64_array(obj, "vals")?;
    let b = f64_array(obj, "b")?;
    if rows.len() != cols.len() || rows.len() != vals.len() {
        return Err(parse_err(format_args!(
            "rows/cols/vals lengths differ ({}, {}, {})",
            rows.len(),
            cols.len(),
            vals.len()
        )));
    }

    let entries: Vec<(usize, usize, f64)> = rows
        .iter()
        .zip(&cols)
        .zip(&vals)
        .map(|((&r, &c), &v)| (r, c, v))
        .collect();
    let matrix = CsrMatrix::from_coo(n, n, &entries)?;
    let mut p = AveProblem::new(matrix, b)?;
    if obj.contains_key("x_star") {
        p = p.with_planted_solution(f64_array(obj, "x_star")?)?;
    }
    if let Some(v) = obj.get("theta") {
        p = p.with_theta_hint(field_f64(v, "theta")?)?;
    }
    match (obj.get("sv_min"), obj.get("sv_max")) {
        (Some(lo), Some(hi)) => {
            p = p.with_singular_value_bounds(field_f64(lo, "sv_min")?, field_f64(hi, "sv_max")?)?;
        }
        (None, None) => {}
        _ => {
            return Err(parse_err("sv_min and sv_max must be given together"));
        }
    }
    if let Some(v) = obj.get("seed") {
        p = p.with_seed(field_u64(v, "seed")?);
    }
    Ok(p)
}

pub fn write_problem(p: &AveProblem, path: &Path) -> Result<()> {
    fs::write(path, problem_to_json(p))?;
    Ok(())
}

pub fn read_problem(path: &Path) -> Result<AveProblem> {
    let text = fs::read_to_string(path)
        .map_err(|e| AveError::Parse(format!("{}: {e}", path.display())))?;
    problem_from_json(&text)
}

/// Export a solve trace as CSV, one row per outer iteration.
pub fn trace_to_csv(report: &SolveReport) -> String {
    let mut out = String::from("k,residual_norm,inner_iters,inner_residual,error_to_planted\n");
    for (k, rec) in report.trace.iter().enumerate() {
        let err = rec
            .error_to_planted
            .map(fmt_f64)
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{k},{},{},{},{err}",
            fmt_f64(rec.residual_norm),
            rec.inner_iterations,
            fmt_f64(rec.inner_residual_norm),
        );
    }
    out
}

pub fn write_trace_csv(report: &SolveReport, path: &Path) -> Result<()> {
    fs::write(path, trace_to_csv(report))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn sample_problem() -> AveProblem {
        let a = CsrMatrix::from_dense(2, 2, &[4.0, 0.0, 0.5, 4.0]).unwrap();
        let x_star = vec![1.0 / 3.0, 0.25];
        let b = {
            let ax = crate::linalg::csr::spmv(&a, &x_star).unwrap();
            ax.iter().zip(&x_star).map(|(axi, xi)| axi - xi.abs()).collect()
        };
        AveProblem::new(a, b)
            .unwrap()
            .with_planted_solution(x_star)
            .unwrap()
            .with_singular_value_bounds(3.75, 4.25)
            .unwrap()
            .with_theta_hint(0.01)
            .unwrap()
            .with_seed(99)
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let p = sample_problem();
        let text = problem_to_json(&p);
        let q = problem_from_json(&text).unwrap();
        assert_eq!(p.matrix(), q.matrix());
        assert_eq!(p.rhs(), q.rhs());
        assert_eq!(p.planted_solution(), q.planted_solution());
        assert_eq!(p.theta_hint(), q.theta_hint());
        assert_eq!(p.sv_min(), q.sv_min());
        assert_eq!(p.seed(), q.seed());
    }

    #[test]
    fn awkward_reals_round_trip() {
        let mut rng = Rng::from_seed(13);
        for _ in 0..200 {
            let v = (rng.next_f64() - 0.5) * 10f64.powi((rng.below(600) as i32) - 300);
            let parsed: f64 = fmt_f64(v).parse().unwrap();
            assert_eq!(v.to_bits(), parsed.to_bits(), "value {v}");
        }
    }

    #[test]
    fn malformed_field_is_named() {
        let text = r#"{"n": 1, "format": "coo", "rows": [0], "cols": [0], "vals": ["x"], "b": [0.0]}"#;
        let err = problem_from_json(text).unwrap_err();
        assert!(err.to_string().contains("vals"), "{err}");
    }

    #[test]
    fn wrong_format_tag_rejected() {
        let text = r#"{"n": 1, "format": "csc", "rows": [0], "cols": [0], "vals": [1.0], "b": [0.0]}"#;
        assert!(matches!(problem_from_json(text), Err(AveError::Parse(_))));
    }

    #[test]
    fn trace_csv_shape() {
        let p = sample_problem();
        let report =
            crate::solver::exact_newton(&p, &[1.0, 1.0], &crate::solver::SolverConfig::exact())
                .unwrap();
        let csv = trace_to_csv(&report);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "k,residual_norm,inner_iters,inner_residual,error_to_planted"
        );
        let first = lines.next().unwrap();
        assert!(first.starts_with("0,"));
        assert_eq!(first.split(',').count(), 5);
    }
}
