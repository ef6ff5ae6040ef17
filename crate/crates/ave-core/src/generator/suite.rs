//! Suite serialization: one problem file per instance plus a JSON manifest
//! recording seeds, start vectors and generator parameters.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{AveError, Result};
use crate::generator::{GeneratedInstance, GeneratorSpec};
use crate::io::{fmt_f64, read_problem, write_problem};
use crate::problem::AveProblem;

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

/// Generator parameters recorded in the manifest.
#[derive(Debug, Clone, Deserialize)]
pub struct GeneratorParams {
    pub n: usize,
    pub density: f64,
    pub count: usize,
    pub base_seed: u64,
    pub sv_rescale: bool,
    pub solution_range: (f64, f64),
    #[serde(default)]
    pub rc_spread: Option<f64>,
}

impl GeneratorParams {
    pub fn from_spec(spec: &GeneratorSpec, count: usize) -> Self {
        GeneratorParams {
            n: spec.n,
            density: spec.density,
            count,
            base_seed: spec.seed,
            sv_rescale: spec.sv_rescale,
            solution_range: spec.solution_range,
            rc_spread: spec.rc_spread,
        }
    }

    pub fn to_spec(&self) -> Result<GeneratorSpec> {
        let spec = GeneratorSpec {
            n: self.n,
            density: self.density,
            seed: self.base_seed,
            sv_rescale: self.sv_rescale,
            solution_range: self.solution_range,
            rc_spread: self.rc_spread,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Per-instance manifest entry. The start vector `x0` lives here, not in
/// the problem file.
#[derive(Debug, Clone, Deserialize)]
pub struct SuiteInstanceMeta {
    pub file: String,
    pub seed: u64,
    pub x0: Vec<f64>,
    pub achieved_density: f64,
    #[serde(default)]
    pub sv_min: Option<f64>,
    #[serde(default)]
    pub sv_max: Option<f64>,
    #[serde(default)]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SuiteManifest {
    pub version: u32,
    pub generator_params: GeneratorParams,
    pub instances: Vec<SuiteInstanceMeta>,
}

/// A manifest together with its loaded problems, index-aligned with
/// `manifest.instances`.
#[derive(Debug, Clone)]
pub struct Suite {
    pub manifest: SuiteManifest,
    pub problems: Vec<AveProblem>,
}

impl Suite {
    pub fn len(&self) -> usize {
        self.problems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.problems.is_empty()
    }
}

fn manifest_to_json(params: &GeneratorParams, instances: &[(String, &GeneratedInstance)]) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = write!(out, "  \"version\": {MANIFEST_VERSION},\n");
    out.push_str("  \"generator_params\": {\n");
    let _ = write!(out, "    \"n\": {},\n", params.n);
    let _ = write!(out, "    \"density\": {},\n", fmt_f64(params.density));
    let _ = write!(out, "    \"count\": {},\n", params.count);
    let _ = write!(out, "    \"base_seed\": {},\n", params.base_seed);
    let _ = write!(out, "    \"sv_rescale\": {},\n", params.sv_rescale);
    let _ = write!(
        out,
        "    \"solution_range\": [{}, {}]",
        fmt_f64(params.solution_range.0),
        fmt_f64(params.solution_range.1)
    );
    if let Some(s) = params.rc_spread {
        let _ = write!(out, ",\n    \"rc_spread\": {}", fmt_f64(s));
    }
    out.push_str("\n  },\n");
    out.push_str("  \"instances\": [\n");
    for (idx, (file, inst)) in instances.iter().enumerate() {
        let p = &inst.problem;
        out.push_str("    {");
        let _ = write!(
            out,
            "\"file\": {}, \"seed\": {}, ",
            serde_json::to_string(file).expect("string encodes"),
            p.seed().unwrap_or(0)
        );
        let mut x0 = String::from("[");
        for (i, v) in inst.x0.iter().enumerate() {
            if i > 0 {
                x0.push(',');
            }
            x0.push_str(&fmt_f64(*v));
        }
        x0.push(']');
        let _ = write!(
            out,
            "\"x0\": {x0}, \"achieved_density\": {}",
            fmt_f64(inst.achieved_density)
        );
        if let Some(v) = p.sv_min() {
            let _ = write!(out, ", \"sv_min\": {}", fmt_f64(v));
        }
        if let Some(v) = p.sv_max() {
            let _ = write!(out, ", \"sv_max\": {}", fmt_f64(v));
        }
        if let Some(v) = p.theta_hint() {
            let _ = write!(out, ", \"theta\": {}", fmt_f64(v));
        }
        out.push('}');
        if idx + 1 < instances.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("  ]\n}\n");
    out
}

/// Write instances and manifest into `dir`, creating it if needed.
/// Returns the manifest path.
pub fn write_suite(
    instances: &[GeneratedInstance],
    params: &GeneratorParams,
    dir: &Path,
) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let named: Vec<(String, &GeneratedInstance)> = instances
        .iter()
        .enumerate()
        .map(|(i, inst)| (format!("problem_{i:04}.json"), inst))
        .collect();
    for (file, inst) in &named {
        write_problem(&inst.problem, &dir.join(file))?;
    }
    let manifest_path = dir.join(MANIFEST_FILE);
    fs::write(&manifest_path, manifest_to_json(params, &named))?;
    Ok(manifest_path)
}

/// Load a suite directory: manifest plus every referenced problem file.
pub fn read_suite(dir: &Path) -> Result<Suite> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&manifest_path)
        .map_err(|e| AveError::Parse(format!("{}: {e}", manifest_path.display())))?;
    let manifest: SuiteManifest =
        serde_json::from_str(&text).map_err(|e| AveError::Parse(format!("manifest: {e}")))?;
    let mut problems = Vec::with_capacity(manifest.instances.len());
    for inst in &manifest.instances {
        let p = read_problem(&dir.join(&inst.file))?;
        if p.n() != inst.x0.len() {
            return Err(AveError::Parse(format!(
                "manifest: x0 length {} does not match problem dimension {} for {}",
                inst.x0.len(),
                p.n(),
                inst.file
            )));
        }
        problems.push(p);
    }
    Ok(Suite { manifest, problems })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{generate_many, GeneratorSpec};

    #[test]
    fn suite_round_trip_is_bit_exact() {
        let spec = GeneratorSpec::new(12, 0.3, 21).unwrap();
        let instances = generate_many(&spec, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let params = GeneratorParams::from_spec(&spec, 3);
        write_suite(&instances, &params, dir.path()).unwrap();
        let suite = read_suite(dir.path()).unwrap();
        assert_eq!(suite.len(), 3);
        for (orig, loaded) in instances.iter().zip(&suite.problems) {
            assert_eq!(orig.problem.matrix(), loaded.matrix());
            assert_eq!(orig.problem.rhs(), loaded.rhs());
        }
        for (orig, meta) in instances.iter().zip(&suite.manifest.instances) {
            assert_eq!(orig.x0, meta.x0);
        }
    }

    #[test]
    fn missing_x0_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = r#"{
  "version": 1,
  "generator_params": {"n": 2, "density": 1.0, "count": 1, "base_seed": 0,
                        "sv_rescale": true, "solution_range": [-100.0, 100.0]},
  "instances": [{"file": "problem_0000.json", "seed": 0, "achieved_density": 1.0}]
}"#;
        std::fs::write(dir.path().join(MANIFEST_FILE), manifest).unwrap();
        let err = read_suite(dir.path()).unwrap_err();
        assert!(err.to_string().contains("x0"), "{err}");
    }

    #[test]
    fn regeneration_from_manifest_params_is_identical() {
        let spec = GeneratorSpec::new(10, 0.4, 5).unwrap();
        let instances = generate_many(&spec, 10).unwrap();
        let params = GeneratorParams::from_spec(&spec, 10);
        let spec_back = params.to_spec().unwrap();
        let regenerated = generate_many(&spec_back, params.count).unwrap();
        for (a, b) in instances.iter().zip(&regenerated) {
            assert_eq!(a.problem.matrix(), b.problem.matrix());
            assert_eq!(a.x0, b.x0);
        }
    }
}
