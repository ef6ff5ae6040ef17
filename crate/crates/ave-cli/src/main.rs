//! `ave`: generate, solve, verify and benchmark absolute value equations
//! `A x - |x| = b` from the command line.
//!
//! Subcommands compose into reproducible pipelines: `generate` writes a
//! seeded suite, `solve` runs one method on one problem, `verify` reports
//! the convergence hypotheses, `bench` times methods across a suite, and
//! `profile` turns a results table into performance-profile CSVs.
//!
//! Exit codes: 0 on success, 1 when a solve does not converge, 2 on usage
//! or input errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ave_core::bench::{
    performance_profile, results_from_csv, run_suite, write_profile_csv, write_results_csv,
    write_summary_csv,
};
use ave_core::generator::{
    generate_many, read_suite, write_suite, GeneratorParams, GeneratorSpec, MANIFEST_FILE,
};
use ave_core::io::{fmt_f64, read_problem, write_trace_csv};
use ave_core::rng::Rng;
use ave_core::solver::{
    solve, verify_hypotheses, FlagCheck, Method, SolveStatus, SolverConfig, ThetaChoice,
};
use ave_core::{AveError, AveProblem};

#[derive(Parser)]
#[command(name = "ave", version, about = "Absolute value equation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded problem suite
    Generate(GenerateArgs),
    /// Solve one problem file
    Solve(SolveArgs),
    /// Report convergence-hypothesis checks for a problem
    Verify(VerifyArgs),
    /// Time methods across a suite and write a results table
    Bench(BenchArgs),
    /// Build performance profiles from a results table
    Profile(ProfileArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Problem dimension
    #[arg(long)]
    n: usize,
    /// Target nonzero density in (0, 1]
    #[arg(long)]
    density: f64,
    /// Number of instances (seeds seed, seed+1, ...)
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Base seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (created if missing)
    #[arg(long)]
    out_dir: PathBuf,
    /// Keep the raw singular values instead of rescaling their minimum
    /// above 3
    #[arg(long)]
    no_sv_rescale: bool,
    /// Spread factor for the singular value profile (> 1 widens, < 1
    /// compresses)
    #[arg(long)]
    rc_spread: Option<f64>,
}

#[derive(Args)]
struct SolveArgs {
    /// Problem file
    #[arg(long)]
    problem: PathBuf,
    /// Newton variant
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Inner residual tolerance: "auto" or a value in [0, 1)
    #[arg(long, default_value = "auto")]
    theta: String,
    /// Outer stopping tolerance on the residual 2-norm
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Outer iteration cap
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    /// Inner iteration cap (default 50 n)
    #[arg(long)]
    max_inner: Option<usize>,
    /// Start point: "zero", "random:<seed>" or "file:<path>"; defaults to
    /// the suite manifest x0 when available, zero otherwise
    #[arg(long)]
    x0: Option<String>,
    /// Write the per-iteration trace CSV here
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Problem file
    #[arg(long)]
    problem: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Suite directory containing manifest.json
    #[arg(long)]
    suite: PathBuf,
    /// Comma-separated method labels
    #[arg(long, default_value = "exact,inexact")]
    methods: String,
    /// Repetitions per (problem, method) cell; the median is recorded
    #[arg(long, default_value_t = 10)]
    reps: usize,
    /// Results CSV path
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    /// Worker threads (falls back to AVE_SOLVE_JOBS, then 1)
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct ProfileArgs {
    /// Results CSV written by `bench`
    #[arg(long)]
    results: PathBuf,
    /// Efficiency window around the fastest time
    #[arg(long, default_value_t = 0.05)]
    window: f64,
    /// Output prefix: writes <prefix>_profile.csv and <prefix>_summary.csv
    #[arg(long)]
    out_prefix: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Inexact,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Profile(args) => cmd_profile(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<ExitCode, AveError> {
    if args.count == 0 {
        return Err(AveError::InvalidConfig("count must be at least 1".into()));
    }
    let mut spec = GeneratorSpec::new(args.n, args.density, args.seed)?;
    spec.sv_rescale = !args.no_sv_rescale;
    spec.rc_spread = args.rc_spread;
    spec.validate()?;
    let instances = generate_many(&spec, args.count)?;
    for inst in &instances {
        for w in &inst.warnings {
            eprintln!("warning: seed {}: {w}", inst.problem.seed().unwrap_or(0));
        }
    }
    let params = GeneratorParams::from_spec(&spec, args.count);
    let manifest = write_suite(&instances, &params, &args.out_dir)?;
    println!("{}", manifest.display());
    Ok(ExitCode::SUCCESS)
}

fn parse_theta(text: &str) -> Result<ThetaChoice, AveError> {
    if text == "auto" {
        return Ok(ThetaChoice::Auto);
    }
    let v: f64 = text
        .parse()
        .map_err(|_| AveError::InvalidConfig(format!("theta must be \"auto\" or a number, got \"{text}\"")))?;
    Ok(ThetaChoice::Fixed(v))
}

/// Look up the manifest x0 for a problem that belongs to a suite directory.
fn manifest_x0(problem_path: &Path) -> Option<Vec<f64>> {
    let dir = problem_path.parent()?;
    if !dir.join(MANIFEST_FILE).is_file() {
        return None;
    }
    let suite = read_suite(dir).ok()?;
    let name = problem_path.file_name()?.to_str()?;
    suite
        .manifest
        .instances
        .iter()
        .position(|inst| inst.file == name)
        .map(|idx| suite.manifest.instances[idx].x0.clone())
}

fn parse_x0(spec: Option<&str>, problem_path: &Path, p: &AveProblem) -> Result<Vec<f64>, AveError> {
    let n = p.n();
    match spec {
        None => Ok(manifest_x0(problem_path).unwrap_or_else(|| vec![0.0; n])),
        Some("zero") => Ok(vec![0.0; n]),
        Some(text) => {
            if let Some(seed_text) = text.strip_prefix("random:") {
                let seed: u64 = seed_text.parse().map_err(|_| {
                    AveError::InvalidConfig(format!("bad seed in --x0 \"{text}\""))
                })?;
                let mut rng = Rng::from_seed(seed);
                Ok((0..n).map(|_| rng.range_f64(-100.0, 100.0)).collect())
            } else if let Some(path) = text.strip_prefix("file:") {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| AveError::Parse(format!("{path}: {e}")))?;
                let values: Result<Vec<f64>, _> = text
                    .split_whitespace()
                    .flat_map(|t| t.split(','))
                    .filter(|t| !t.is_empty())
                    .map(str::parse::<f64>)
                    .collect();
                let values =
                    values.map_err(|e| AveError::Parse(format!("{path}: bad start vector: {e}")))?;
                if values.len() != n {
                    return Err(AveError::DimensionMismatch {
                        expected: n,
                        found: values.len(),
                    });
                }
                Ok(values)
            } else {
                Err(AveError::InvalidConfig(format!(
                    "--x0 must be \"zero\", \"random:<seed>\" or \"file:<path>\", got \"{text}\""
                )))
            }
        }
    }
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode, AveError> {
    let problem = read_problem(&args.problem)?;
    let method = match args.method {
        MethodArg::Exact => Method::Exact,
        MethodArg::Inexact => Method::Inexact,
    };
    let cfg = SolverConfig {
        method,
        theta: parse_theta(&args.theta)?,
        outer_tol: args.tol,
        max_outer: args.max_iter,
        max_inner: args.max_inner,
        ..SolverConfig::exact()
    };
    let x0 = parse_x0(args.x0.as_deref(), &args.problem, &problem)?;
    let report = solve(&problem, &x0, &cfg)?;
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    if let Some(path) = &args.trace {
        write_trace_csv(&report, path)?;
    }
    match report.status {
        SolveStatus::SolutionFound => println!("Solution found"),
        SolveStatus::MaxIter => println!("Failure: iteration limit reached"),
        SolveStatus::InnerFailure => println!("Failure: inner solver did not reach its tolerance"),
        SolveStatus::SingularSystem => println!("Failure: singular linear system"),
    }
    println!("iterations: {}", report.iterations);
    println!("final residual: {}", fmt_f64(report.final_residual_norm()));
    if method == Method::Inexact {
        println!("theta: {}", fmt_f64(report.theta_used));
    }
    if report.solved() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn flag_line(name: &str, check: &FlagCheck, value_label: &str) {
    match check {
        FlagCheck::Evaluated { holds, value } => {
            println!("{name}: {holds} ({value_label} = {})", fmt_f64(*value));
        }
        FlagCheck::Failed { reason } => {
            println!("{name}: failed ({reason})");
        }
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, AveError> {
    let problem = read_problem(&args.problem)?;
    let report = verify_hypotheses(&problem);
    flag_line("singular values exceed 1", &report.sv_min_exceeds_one, "sv_min");
    flag_line("inverse norm < 1", &report.inverse_norm_lt_one, "norm");
    flag_line("inverse norm < 1/3", &report.inverse_norm_lt_third, "norm");
    match &report.signwise_inverse_lt_half {
        Some(check) => flag_line("signwise inverse norm < 1/2", check, "max"),
        None => println!("signwise inverse norm < 1/2: skipped (n > 12)"),
    }
    Ok(ExitCode::SUCCESS)
}

fn method_config(label: &str) -> Result<(String, SolverConfig), AveError> {
    match label {
        "exact" => Ok((label.to_string(), SolverConfig::exact())),
        "inexact" => Ok((label.to_string(), SolverConfig::inexact(ThetaChoice::Auto))),
        other => Err(AveError::InvalidConfig(format!(
            "unknown method \"{other}\" (expected exact or inexact)"
        ))),
    }
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode, AveError> {
    if args.reps == 0 {
        return Err(AveError::InvalidConfig("reps must be at least 1".into()));
    }
    let suite = read_suite(&args.suite)?;
    let methods: Vec<(String, SolverConfig)> = args
        .methods
        .split(',')
        .filter(|s| !s.is_empty())
        .map(method_config)
        .collect::<Result<_, _>>()?;
    let jobs = args
        .jobs
        .or_else(|| {
            std::env::var("AVE_SOLVE_JOBS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(1);
    let results = run_suite(&suite, &methods, args.reps, jobs)?;
    write_results_csv(&results, &args.out)?;
    let solved: usize = results
        .cells
        .iter()
        .flatten()
        .filter(|c| c.status.solved())
        .count();
    println!(
        "{} problems x {} methods, {} cells solved; results in {}",
        results.problems.len(),
        results.methods.len(),
        solved,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_profile(args: ProfileArgs) -> Result<ExitCode, AveError> {
    let text = std::fs::read_to_string(&args.results)
        .map_err(|e| AveError::Parse(format!("{}: {e}", args.results.display())))?;
    let results = results_from_csv(&text)?;
    let (curves, summary) = performance_profile(&results, args.window)?;
    let profile_path = PathBuf::from(format!("{}_profile.csv", args.out_prefix));
    let summary_path = PathBuf::from(format!("{}_summary.csv", args.out_prefix));
    write_profile_csv(&curves, &profile_path)?;
    write_summary_csv(&summary, &summary_path)?;
    println!("profile: {}", profile_path.display());
    println!("summary: {}", summary_path.display());
    // efficiency uses the window; rho(1) is the strict-fastest rate
    for m in &summary.methods {
        println!(
            "{}: efficiency {:.1}% (window {}), rho_at_one {:.1}%, robustness {:.1}%",
            m.method,
            100.0 * m.efficiency,
            args.window,
            100.0 * m.rho_at_one,
            100.0 * m.robustness
        );
    }
    Ok(ExitCode::SUCCESS)
}
