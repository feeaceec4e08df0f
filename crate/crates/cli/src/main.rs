use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use iscra_cli::experiment::{self, Level, MetricsRow, SolverKind, SolverSettings, SweepPlan, Variant};
use iscra_cli::source::InstanceSource;
use serde::Deserialize;
use sparse_iscra::analysis::{diagnose, DiagnoseConfig};
use sparse_iscra::verify::{distance_to_lasso_segment, run_toy_suite, Fault, Outcome, VerifyConfig};

const EXACT_TOL: f64 = 1e-10;

#[derive(Parser)]
#[command(name = "iscra", version, about = "Sparse regression by sequential truncated-l1 relaxation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance with one solver and print its metrics row.
    Solve(SolveArgs),
    /// Run a grid of solvers, regularization levels and seeds.
    Sweep(SweepArgs),
    /// Print a JSON diagnostics report for an instance.
    Diagnose(DiagnoseArgs),
    /// Run the self-check suite on the toy instances.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct SourceArgs {
    /// Toy (exam31, exam41, exam42) or synthetic (exam51..exam55) preset.
    #[arg(long, conflicts_with_all = ["synthetic", "libsvm"])]
    preset: Option<String>,
    /// Synthetic preset name; same as --preset.
    #[arg(long, conflicts_with = "libsvm")]
    synthetic: Option<String>,
    /// LIBSVM file; relative paths fall back to $SPARSE_ISCRA_DATA_DIR.
    #[arg(long)]
    libsvm: Option<PathBuf>,
    /// Polynomial feature expansion degree for --libsvm.
    #[arg(long, requires = "libsvm")]
    poly: Option<usize>,
    /// Number of samples for synthetic presets.
    #[arg(long)]
    m: Option<usize>,
    /// Noise level of the toy instances.
    #[arg(long)]
    e: Option<f64>,
}

impl SourceArgs {
    fn source(&self) -> Result<InstanceSource> {
        match (&self.preset, &self.synthetic, &self.libsvm) {
            (Some(name), _, _) | (None, Some(name), _) => InstanceSource::preset(name, self.e, self.m),
            (None, None, Some(path)) => Ok(InstanceSource::Libsvm { path: path.clone(), poly: self.poly }),
            (None, None, None) => bail!("one of --preset, --synthetic or --libsvm is required"),
        }
    }
}

/// Solver knobs that may also come from a JSON config file; flags win.
#[derive(Args, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct Knobs {
    #[arg(long)]
    lambda: Option<f64>,
    /// Scale c such that lambda = c·‖Aᵀb‖∞ / m².
    #[arg(long, conflicts_with = "lambda")]
    clambda: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Inner solver tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_outer: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Knobs {
    fn merged(self, config: Option<&PathBuf>) -> Result<Self> {
        let Some(path) = config else { return Ok(self) };
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file: Knobs = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let (lambda, clambda) = match (self.lambda, self.clambda) {
            (None, None) => (file.lambda, file.clambda),
            given => given,
        };
        Ok(Self {
            lambda,
            clambda,
            rho: self.rho.or(file.rho),
            mu: self.mu.or(file.mu),
            epsilon: self.epsilon.or(file.epsilon),
            tol: self.tol.or(file.tol),
            max_outer: self.max_outer.or(file.max_outer),
            seed: self.seed.or(file.seed),
        })
    }

    /// Toy instances default to an exact-mode inner tolerance.
    fn settings(&self, source: &InstanceSource) -> SolverSettings {
        let mut d = SolverSettings::default();
        if matches!(source, InstanceSource::Toy { .. }) {
            d.tol = EXACT_TOL;
        }
        SolverSettings {
            rho: self.rho.unwrap_or(d.rho),
            mu: self.mu.unwrap_or(d.mu),
            epsilon: self.epsilon.unwrap_or(d.epsilon),
            tol: self.tol.unwrap_or(d.tol),
            max_outer: self.max_outer.unwrap_or(d.max_outer),
        }
    }

    fn level(&self) -> Result<Level> {
        match (self.lambda, self.clambda) {
            (Some(l), _) => Ok(Level::Absolute(l)),
            (None, Some(c)) => Ok(Level::Scale(c)),
            (None, None) => bail!("one of --lambda or --clambda is required"),
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    knobs: Knobs,
    #[arg(long, value_enum, default_value = "iscra")]
    solver: SolverKind,
    /// Directory for solution.json, trace.json and metrics.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fill the time_s column (makes output run-dependent).
    #[arg(long)]
    record_time: bool,
    /// JSON file with default values for the solver knobs.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    knobs: Knobs,
    #[arg(long, value_delimiter = ',')]
    clambdas: Vec<f64>,
    #[arg(long, value_delimiter = ',', conflicts_with = "clambdas")]
    lambdas: Vec<f64>,
    #[arg(long, value_enum, value_delimiter = ',')]
    solvers: Vec<SolverKind>,
    /// Explicit seeds; otherwise `--replications` seeds starting at `--seed`.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = 1)]
    replications: u64,
    /// iSCRA variants, one per μ value.
    #[arg(long, value_delimiter = ',')]
    mus: Vec<f64>,
    /// iSCRA variants, one per ϱ value.
    #[arg(long, value_delimiter = ',')]
    rhos: Vec<f64>,
    /// CSV output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    record_time: bool,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    #[arg(long, conflicts_with = "lambda")]
    clambda: Option<f64>,
    /// Sparsity level; defaults to the true support size.
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, default_value_t = 0.7)]
    gamma: f64,
    #[arg(long, default_value_t = 200.0)]
    tau: f64,
    #[arg(long, default_value_t = 2.0)]
    rec_c: f64,
    #[arg(long)]
    cap: Option<f64>,
    /// Number of candidate directions per null-space query.
    #[arg(long, default_value_t = 200)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    CorruptProx,
}

#[derive(Args)]
struct VerifyArgs {
    /// Regularization used by the baseline contrast check.
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    #[arg(long, default_value_t = 0.05)]
    e: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<FaultArg>,
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    let knobs = args.knobs.merged(args.config.as_ref())?;
    let source = args.source.source()?;
    let seed = knobs.seed.unwrap_or(0);
    let (instance, truth) = source.load(seed)?;
    let level = knobs.level()?;
    let lambda = level.lambda(&instance);
    let variant = Variant::plain(args.solver);
    let outcome = experiment::solve(&instance, &variant, lambda, &knobs.settings(&source))?;
    let c_lambda = match level {
        Level::Scale(c) => Some(c),
        Level::Absolute(_) => None,
    };
    let row = MetricsRow::from_outcome(
        variant.label(),
        &instance,
        truth.as_ref(),
        lambda,
        c_lambda,
        seed.to_string(),
        &outcome,
        args.record_time,
    )?;

    if args.solver == SolverKind::Lasso && matches!(&source, InstanceSource::Toy { name, .. } if name == "exam42") {
        eprintln!("distance to the Lasso solution segment: {:e}", distance_to_lasso_segment(&outcome.x, lambda));
    }

    experiment::write_csv(io::stdout().lock(), std::slice::from_ref(&row))?;
    if let Some(dir) = args.out {
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let solution = serde_json::json!({ "x": outcome.x.as_slice() });
        fs::write(dir.join("solution.json"), serde_json::to_string_pretty(&solution)?)?;
        let trace = serde_json::json!({ "summary": experiment::trace_summary(&outcome), "trace": outcome.trace });
        fs::write(dir.join("trace.json"), serde_json::to_string_pretty(&trace)?)?;
        experiment::write_csv(fs::File::create(dir.join("metrics.csv"))?, std::slice::from_ref(&row))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode> {
    let knobs = args.knobs.merged(args.config.as_ref())?;
    let source = args.source.source()?;
    let levels: Vec<Level> = if !args.clambdas.is_empty() {
        args.clambdas.iter().map(|&c| Level::Scale(c)).collect()
    } else if !args.lambdas.is_empty() {
        args.lambdas.iter().map(|&l| Level::Absolute(l)).collect()
    } else {
        vec![knobs.level()?]
    };
    let seeds = if args.seeds.is_empty() {
        let base = knobs.seed.unwrap_or(0);
        (base..base + args.replications).collect()
    } else {
        args.seeds.clone()
    };
    let mut variants: Vec<Variant> = args.solvers.iter().map(|&k| Variant::plain(k)).collect();
    variants.extend(args.mus.iter().map(|&mu| Variant { mu: Some(mu), ..Variant::plain(SolverKind::Iscra) }));
    variants.extend(args.rhos.iter().map(|&rho| Variant { rho: Some(rho), ..Variant::plain(SolverKind::Iscra) }));
    if variants.is_empty() {
        variants.push(Variant::plain(SolverKind::Iscra));
    }
    let settings = knobs.settings(&source);
    let plan = SweepPlan { source, variants, levels, seeds, settings, record_time: args.record_time };
    let rows = experiment::sweep(&plan)?;
    match args.out {
        Some(path) => experiment::write_csv(fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?, &rows)?,
        None => experiment::write_csv(io::stdout().lock(), &rows)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_diagnose(args: DiagnoseArgs) -> Result<ExitCode> {
    let (instance, truth) = args.source.source()?.load(args.seed)?;
    let lambda = match args.clambda {
        Some(c) => instance.lambda_from_scale(c),
        None => args.lambda,
    };
    let config = DiagnoseConfig {
        r: args.r,
        gamma: args.gamma,
        tau: args.tau,
        rec_c: args.rec_c,
        cap: args.cap,
        search_budget: args.budget,
        seed: args.seed,
        ..DiagnoseConfig::new(lambda)
    };
    let report = diagnose(&instance, truth.as_ref(), &config)?;
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &report)?;
    writeln!(out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let config = VerifyConfig {
        lambda: args.lambda,
        noise: args.e,
        seed: args.seed,
        fault: args.inject_fault.map(|FaultArg::CorruptProx| Fault::CorruptProx),
        ..VerifyConfig::default()
    };
    let results = run_toy_suite(&config);
    let mut out = io::stdout().lock();
    for r in &results {
        match &r.outcome {
            Outcome::Pass => writeln!(out, "PASS {} ({:.3}s)", r.name, r.elapsed_s)?,
            Outcome::Fail(why) => writeln!(out, "FAIL {}: {why}", r.name)?,
            Outcome::Skipped(why) => writeln!(out, "SKIP {}: {why}", r.name)?,
        }
    }
    Ok(if results.iter().any(|r| r.failed()) { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Diagnose(a) => cmd_diagnose(a),
        Command::Verify(a) => cmd_verify(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
