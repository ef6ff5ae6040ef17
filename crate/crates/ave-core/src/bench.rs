//! Suite execution with median timing and performance profiles.
//!
//! Each `(problem, method)` cell is solved `repetitions` times serially and
//! scored by the median wall-clock time (lower median for even counts, for
//! determinism). Failed solves carry no time. Profiles follow the usual
//! construction: per problem, each method's time is divided by the best
//! method's time; `rho(tau)` is the fraction of problems with ratio at most
//! `tau`, and failures count as infinite ratio.

use std::fmt::Write as _;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::error::{AveError, Result};
use crate::generator::Suite;
use crate::io::fmt_f64;
use crate::solver::{solve, SolveStatus, SolverConfig};

/// Outcome of one `(problem, method)` cell.
#[derive(Debug, Clone, PartialEq)]
pub enum CellStatus {
    SolutionFound,
    MaxIter,
    InnerFailure,
    SingularSystem,
    Panicked,
    Error(String),
}

impl CellStatus {
    pub fn label(&self) -> &str {
        match self {
            CellStatus::SolutionFound => "solution_found",
            CellStatus::MaxIter => "max_iter",
            CellStatus::InnerFailure => "inner_failure",
            CellStatus::SingularSystem => "singular_system",
            CellStatus::Panicked => "panic",
            CellStatus::Error(_) => "error",
        }
    }

    pub fn solved(&self) -> bool {
        matches!(self, CellStatus::SolutionFound)
    }

    fn from_label(label: &str) -> Result<Self> {
        Ok(match label {
            "solution_found" => CellStatus::SolutionFound,
            "max_iter" => CellStatus::MaxIter,
            "inner_failure" => CellStatus::InnerFailure,
            "singular_system" => CellStatus::SingularSystem,
            "panic" => CellStatus::Panicked,
            "error" => CellStatus::Error(String::new()),
            other => return Err(AveError::Parse(format!("unknown status \"{other}\""))),
        })
    }
}

impl From<SolveStatus> for CellStatus {
    fn from(s: SolveStatus) -> Self {
        match s {
            SolveStatus::SolutionFound => CellStatus::SolutionFound,
            SolveStatus::MaxIter => CellStatus::MaxIter,
            SolveStatus::InnerFailure => CellStatus::InnerFailure,
            SolveStatus::SingularSystem => CellStatus::SingularSystem,
        }
    }
}

/// One cell of the results table. A time is present exactly when the solve
/// succeeded.
#[derive(Debug, Clone)]
pub struct BenchCell {
    pub status: CellStatus,
    pub median_seconds: Option<f64>,
    pub iterations: usize,
}

/// Timing table across `(problem, method)`.
#[derive(Debug, Clone)]
pub struct BenchResults {
    pub methods: Vec<String>,
    pub problems: Vec<String>,
    /// `cells[problem_index][method_index]`
    pub cells: Vec<Vec<BenchCell>>,
}

/// Performance profile step function for one method. Breakpoints are sorted,
/// start at 1 and the value at the last breakpoint equals the method's
/// robustness.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub method: String,
    pub tau_breakpoints: Vec<f64>,
    pub rho_values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MethodSummary {
    pub method: String,
    /// Fraction of problems solved within `(1 + window)` of the fastest time.
    pub efficiency: f64,
    /// Fraction of problems solved at all.
    pub robustness: f64,
    /// Profile value at tau = 1 (strictly fastest, no window).
    pub rho_at_one: f64,
}

#[derive(Debug, Clone)]
pub struct ProfileSummary {
    pub window: f64,
    pub methods: Vec<MethodSummary>,
}

/// Solve every suite problem with every method, `repetitions` times each.
///
/// Cells run on up to `jobs` worker threads; the repetitions inside one cell
/// stay serial on one worker to keep the timer quiet. Panicking or erroring
/// solves become failure entries instead of aborting the run.
pub fn run_suite(
    suite: &Suite,
    methods: &[(String, SolverConfig)],
    repetitions: usize,
    jobs: usize,
) -> Result<BenchResults> {
    if repetitions == 0 {
        return Err(AveError::InvalidConfig("repetitions must be at least 1".into()));
    }
    if methods.is_empty() {
        return Err(AveError::InvalidConfig("at least one method required".into()));
    }
    let n_problems = suite.len();
    let n_methods = methods.len();
    let total = n_problems * n_methods;

    let slots: Vec<Mutex<Option<BenchCell>>> = (0..total).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = jobs.max(1).min(total.max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= total {
                    break;
                }
                let pi = idx / n_methods;
                let mi = idx % n_methods;
                let cell = run_cell(
                    &suite.problems[pi],
                    &suite.manifest.instances[pi].x0,
                    &methods[mi].1,
                    repetitions,
                );
                *slots[idx].lock().unwrap() = Some(cell);
            });
        }
    });

    let mut cells = Vec::with_capacity(n_problems);
    let mut flat = slots.into_iter();
    for _ in 0..n_problems {
        let mut row = Vec::with_capacity(n_methods);
        for _ in 0..n_methods {
            row.push(
                flat.next()
                    .and_then(|m| m.into_inner().unwrap())
                    .expect("all cells filled"),
            );
        }
        cells.push(row);
    }

    Ok(BenchResults {
        methods: methods.iter().map(|(label, _)| label.clone()).collect(),
        problems: suite
            .manifest
            .instances
            .iter()
            .map(|i| i.file.clone())
            .collect(),
        cells,
    })
}

fn run_cell(
    problem: &crate::problem::AveProblem,
    x0: &[f64],
    cfg: &SolverConfig,
    repetitions: usize,
) -> BenchCell {
    let mut times = Vec::with_capacity(repetitions);
    let mut status = CellStatus::SolutionFound;
    let mut iterations = 0;
    for rep in 0..repetitions {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| solve(problem, x0, cfg)));
        let elapsed = started.elapsed().as_secs_f64();
        match outcome {
            Ok(Ok(report)) => {
                if rep == 0 {
                    status = report.status.into();
                    iterations = report.iterations;
                    if !status.solved() {
                        // deterministic solves fail identically; no time is
                        // recorded, so skip the remaining repetitions
                        break;
                    }
                }
                times.push(elapsed);
            }
            Ok(Err(e)) => {
                return BenchCell {
                    status: CellStatus::Error(e.to_string()),
                    median_seconds: None,
                    iterations: 0,
                };
            }
            Err(_) => {
                return BenchCell {
                    status: CellStatus::Panicked,
                    median_seconds: None,
                    iterations: 0,
                };
            }
        }
    }
    let median_seconds = if status.solved() {
        Some(lower_median(&mut times))
    } else {
        None
    };
    BenchCell {
        status,
        median_seconds,
        iterations,
    }
}

/// Lower median: element at index `(k - 1) / 2` of the sorted sample.
fn lower_median(times: &mut [f64]) -> f64 {
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    times[(times.len() - 1) / 2]
}

/// Build profile curves and the efficiency/robustness summary.
pub fn performance_profile(
    results: &BenchResults,
    efficiency_window: f64,
) -> Result<(Vec<ProfileCurve>, ProfileSummary)> {
    if results.problems.is_empty() || results.methods.is_empty() {
        return Err(AveError::EmptyResults);
    }
    if efficiency_window < 0.0 {
        return Err(AveError::InvalidConfig("efficiency window must be nonnegative".into()));
    }
    let n_problems = results.problems.len();
    let n_methods = results.methods.len();

    // per-problem best time among solved methods
    let mut best: Vec<Option<f64>> = Vec::with_capacity(n_problems);
    for row in &results.cells {
        let min = row
            .iter()
            .filter_map(|c| c.median_seconds)
            .fold(f64::INFINITY, f64::min);
        best.push(if min.is_finite() { Some(min) } else { None });
    }

    // ratios[method][problem]; failures are +inf
    let mut ratios = vec![Vec::with_capacity(n_problems); n_methods];
    for (pi, row) in results.cells.iter().enumerate() {
        for (mi, cell) in row.iter().enumerate() {
            let ratio = match (cell.median_seconds, best[pi]) {
                (Some(t), Some(b)) => t / b,
                _ => f64::INFINITY,
            };
            ratios[mi].push(ratio);
        }
    }

    let global_max_ratio = ratios
        .iter()
        .flatten()
        .filter(|r| r.is_finite())
        .fold(1.0f64, |m, &r| m.max(r));

    let mut curves = Vec::with_capacity(n_methods);
    let mut summaries = Vec::with_capacity(n_methods);
    for (mi, method) in results.methods.iter().enumerate() {
        let mut finite: Vec<f64> = ratios[mi].iter().copied().filter(|r| r.is_finite()).collect();
        finite.sort_by(|a, b| a.partial_cmp(b).expect("finite ratios"));

        let mut breakpoints = vec![1.0];
        breakpoints.extend(finite.iter().copied());
        breakpoints.push(global_max_ratio);
        breakpoints.dedup();

        let rho_values: Vec<f64> = breakpoints
            .iter()
            .map(|&tau| finite.iter().filter(|&&r| r <= tau).count() as f64 / n_problems as f64)
            .collect();

        let robustness = finite.len() as f64 / n_problems as f64;
        let rho_at_one = rho_values[0];
        let efficient = ratios[mi]
            .iter()
            .filter(|&&ratio| ratio <= 1.0 + efficiency_window)
            .count();
        summaries.push(MethodSummary {
            method: method.clone(),
            efficiency: efficient as f64 / n_problems as f64,
            robustness,
            rho_at_one,
        });
        curves.push(ProfileCurve {
            method: method.clone(),
            tau_breakpoints: breakpoints,
            rho_values,
        });
    }

    Ok((
        curves,
        ProfileSummary {
            window: efficiency_window,
            methods: summaries,
        },
    ))
}

/// Results CSV: `problem,method,status,median_seconds,iterations`, one row
/// per cell in `(problem, method)` order. Failed cells have an empty time.
pub fn results_to_csv(results: &BenchResults) -> String {
    let mut out = String::from("problem,method,status,median_seconds,iterations\n");
    for (pi, problem) in results.problems.iter().enumerate() {
        for (mi, method) in results.methods.iter().enumerate() {
            let cell = &results.cells[pi][mi];
            let time = cell.median_seconds.map(fmt_f64).unwrap_or_default();
            let _ = writeln!(
                out,
                "{problem},{method},{},{time},{}",
                cell.status.label(),
                cell.iterations
            );
        }
    }
    out
}

/// Parse a results CSV back into a table.
pub fn results_from_csv(text: &str) -> Result<BenchResults> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| AveError::Parse("results csv: empty file".into()))?;
    if header != "problem,method,status,median_seconds,iterations" {
        return Err(AveError::Parse(format!("results csv: unexpected header \"{header}\"")));
    }
    let mut methods: Vec<String> = Vec::new();
    let mut problems: Vec<String> = Vec::new();
    let mut parsed: Vec<(String, String, BenchCell)> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(AveError::Parse(format!(
                "results csv line {}: expected 5 fields, got {}",
                lineno + 2,
                fields.len()
            )));
        }
        let status = CellStatus::from_label(fields[2])?;
        let median_seconds = if fields[3].is_empty() {
            None
        } else {
            Some(fields[3].parse::<f64>().map_err(|e| {
                AveError::Parse(format!("results csv line {}: median_seconds: {e}", lineno + 2))
            })?)
        };
        if status.solved() != median_seconds.is_some() {
            return Err(AveError::Parse(format!(
                "results csv line {}: time present iff status is solution_found",
                lineno + 2
            )));
        }
        let iterations = fields[4].parse::<usize>().map_err(|e| {
            AveError::Parse(format!("results csv line {}: iterations: {e}", lineno + 2))
        })?;
        if !problems.contains(&fields[0].to_string()) {
            problems.push(fields[0].to_string());
        }
        if !methods.contains(&fields[1].to_string()) {
            methods.push(fields[1].to_string());
        }
        parsed.push((
            fields[0].to_string(),
            fields[1].to_string(),
            BenchCell {
                status,
                median_seconds,
                iterations,
            },
        ));
    }
    if parsed.len() != problems.len() * methods.len() {
        return Err(AveError::Parse(format!(
            "results csv: {} rows do not fill a {}x{} table",
            parsed.len(),
            problems.len(),
            methods.len()
        )));
    }
    let mut cells: Vec<Vec<Option<BenchCell>>> = vec![vec![None; methods.len()]; problems.len()];
    for (problem, method, cell) in parsed {
        let pi = problems.iter().position(|p| *p == problem).unwrap();
        let mi = methods.iter().position(|m| *m == method).unwrap();
        if cells[pi][mi].is_some() {
            return Err(AveError::Parse(format!(
                "results csv: duplicate cell ({problem}, {method})"
            )));
        }
        cells[pi][mi] = Some(cell);
    }
    let cells = cells
        .into_iter()
        .map(|row| row.into_iter().map(|c| c.expect("table filled")).collect())
        .collect();
    Ok(BenchResults {
        methods,
        problems,
        cells,
    })
}

/// Profile CSV: `method,tau,rho` with full-precision reals.
pub fn profile_to_csv(curves: &[ProfileCurve]) -> String {
    let mut out = String::from("method,tau,rho\n");
    for curve in curves {
        for (tau, rho) in curve.tau_breakpoints.iter().zip(&curve.rho_values) {
            let _ = writeln!(out, "{},{},{}", curve.method, fmt_f64(*tau), fmt_f64(*rho));
        }
    }
    out
}

/// Parse a profile CSV back into curves.
pub fn profile_from_csv(text: &str) -> Result<Vec<ProfileCurve>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| AveError::Parse("profile csv: empty file".into()))?;
    if header != "method,tau,rho" {
        return Err(AveError::Parse(format!("profile csv: unexpected header \"{header}\"")));
    }
    let mut curves: Vec<ProfileCurve> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(AveError::Parse(format!(
                "profile csv line {}: expected 3 fields",
                lineno + 2
            )));
        }
        let tau: f64 = fields[1]
            .parse()
            .map_err(|e| AveError::Parse(format!("profile csv line {}: tau: {e}", lineno + 2)))?;
        let rho: f64 = fields[2]
            .parse()
            .map_err(|e| AveError::Parse(format!("profile csv line {}: rho: {e}", lineno + 2)))?;
        match curves.last_mut() {
            Some(c) if c.method == fields[0] => {
                c.tau_breakpoints.push(tau);
                c.rho_values.push(rho);
            }
            _ => curves.push(ProfileCurve {
                method: fields[0].to_string(),
                tau_breakpoints: vec![tau],
                rho_values: vec![rho],
            }),
        }
    }
    Ok(curves)
}

/// Summary CSV: `method,efficiency,robustness` as percentages with one
/// decimal place.
pub fn summary_to_csv(summary: &ProfileSummary) -> String {
    let mut out = String::from("method,efficiency,robustness\n");
    for m in &summary.methods {
        let _ = writeln!(
            out,
            "{},{:.1},{:.1}",
            m.method,
            100.0 * m.efficiency,
            100.0 * m.robustness
        );
    }
    out
}

pub fn write_results_csv(results: &BenchResults, path: &Path) -> Result<()> {
    fs::write(path, results_to_csv(results))?;
    Ok(())
}

pub fn write_profile_csv(curves: &[ProfileCurve], path: &Path) -> Result<()> {
    fs::write(path, profile_to_csv(curves))?;
    Ok(())
}

pub fn write_summary_csv(summary: &ProfileSummary, path: &Path) -> Result<()> {
    fs::write(path, summary_to_csv(summary))?;
    Ok(())
}
