//! Command-line surface: single runs, tuning sweeps, trace aggregation,
//! registry listing, and the validator battery.
//!
//! Exit codes: 0 on success, 1 on runtime failure (aborted run, unreadable or
//! malformed file, failed validator), 2 on usage errors (bad flags, unknown
//! problem, grid violating method constraints).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::directions::Method;
use crate::error::Error;
use crate::harness::{
    aggregate, aggregate_unchecked, final_runs, tune, AggregateSummary, TuningSpec,
};
use crate::optimizer::{run, RunConfig};
use crate::problems::{
    make_logreg, make_nlls, make_stochastic_quadratic, registry, LabelMap, LogRegOptions,
    NoiseModel, StochasticProblem, NLLS_NAMES,
};
use crate::trace::{RunStatus, RunTrace};
use crate::validate;

#[derive(Parser)]
#[command(name = "zograd", version, about = "Derivative-free stochastic optimization with adaptive sampling")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute a single optimization run and write its trace CSV.
    Run(RunArgs),
    /// Grid-tune hyperparameters (worst of 3 seeds), run 17 more seeds of the
    /// winner, and write all 20 traces plus a quantile summary.
    Tune(TuneArgs),
    /// Aggregate previously written trace CSVs into a quantile summary.
    Aggregate(AggregateArgs),
    /// List the registered problems.
    Problems(ProblemsArgs),
    /// Run the estimator and oracle validators and report pass/fail per check.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct ProblemFlags {
    /// Problem id: bdqrtic, cube, chebyquad, osborne2, quadratic, or logreg.
    #[arg(long)]
    problem: String,
    /// Noise model for the least-squares problems.
    #[arg(long, value_enum, default_value_t = NoiseModel::Abs)]
    noise: NoiseModel,
    /// Noise level: sigma for the least-squares problems, the noise scale for
    /// the quadratic.
    #[arg(long, default_value_t = 1e-3)]
    sigma: f64,
    /// Dimension of the quadratic problem (others have fixed dimensions).
    #[arg(long, default_value_t = 10)]
    dim: usize,
    /// LIBSVM-format data file (required by logreg).
    #[arg(long)]
    data: Option<PathBuf>,
    /// How logreg maps labels to {-1, +1}.
    #[arg(long, value_enum, default_value_t = LabelMap::Auto)]
    label_map: LabelMap,
    /// Divide every feature value by this (e.g. 255 for pixel data).
    #[arg(long, default_value_t = 1.0)]
    feature_scale: f64,
    /// Regularization weight for logreg; defaults to 1/N_data.
    #[arg(long)]
    lambda: Option<f64>,
    /// Known optimal value for logreg, skipping the reference solve.
    #[arg(long)]
    f_star: Option<f64>,
}

impl ProblemFlags {
    fn build(&self) -> Result<Box<dyn StochasticProblem>, Failure> {
        match self.problem.as_str() {
            name if NLLS_NAMES.contains(&name) => {
                make_nlls(name, self.noise, self.sigma).map_err(Failure::usage)
            }
            "quadratic" => {
                if self.sigma < 0.0 {
                    return Err(Failure::Usage("--sigma must be non-negative".into()));
                }
                Ok(Box::new(make_stochastic_quadratic(self.dim, self.sigma)))
            }
            "logreg" => {
                let path = self.data.as_ref().ok_or_else(|| {
                    Failure::Usage("--problem logreg requires --data <file>".into())
                })?;
                let options = LogRegOptions {
                    label_map: self.label_map,
                    feature_scale: self.feature_scale,
                    lambda: self.lambda,
                    f_star_override: self.f_star,
                };
                make_logreg(path, options)
                    .map(|p| Box::new(p) as Box<dyn StochasticProblem>)
                    .map_err(Failure::runtime)
            }
            other => Err(Failure::usage(Error::UnknownProblem {
                name: other.to_string(),
                known: format!("{}, quadratic, logreg", NLLS_NAMES.join(", ")),
            })),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemFlags,
    #[arg(long, value_enum)]
    method: Method,
    #[arg(long)]
    nu: f64,
    #[arg(long)]
    alpha: f64,
    /// Total stochastic-oracle evaluation allowance.
    #[arg(long)]
    budget: u64,
    #[arg(long, default_value_t = 0.9)]
    theta: f64,
    /// Directions per iteration; defaults to the problem dimension.
    #[arg(long)]
    num_dirs: Option<usize>,
    /// Initial batch size; defaults to 2, or 10% of the data for logreg.
    #[arg(long)]
    s0: Option<usize>,
    /// Defaults to ZOGRAD_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Batch-size ceiling; defaults to the data size for logreg, else 10^6.
    #[arg(long)]
    sample_cap: Option<usize>,
    /// Stop after this many iterations even with budget left.
    #[arg(long)]
    max_iters: Option<u64>,
    #[arg(long, default_value = "trace.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    problem: ProblemFlags,
    #[arg(long, value_enum)]
    method: Method,
    #[arg(long)]
    budget: u64,
    #[arg(long, default_value_t = 0.9)]
    theta: f64,
    #[arg(long)]
    s0: Option<usize>,
    #[arg(long)]
    sample_cap: Option<usize>,
    /// Master seed for the 3 tuning + 17 final seeds; defaults to
    /// ZOGRAD_SEED, then 0.
    #[arg(long)]
    master_seed: Option<u64>,
    /// Grid override, e.g. --grid-num-dirs 2,5,10.
    #[arg(long, value_delimiter = ',')]
    grid_num_dirs: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    grid_nu: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    grid_alpha: Option<Vec<f64>>,
    /// Worker threads for the run pool; defaults to the logical core count.
    #[arg(long)]
    jobs: Option<usize>,
    /// Directory receiving the 20 trace CSVs and the summary CSV.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct AggregateArgs {
    /// Glob matching the trace CSVs to aggregate.
    #[arg(long)]
    glob: String,
    #[arg(long)]
    out: PathBuf,
    /// Aggregate even if the traces carry different configurations.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct ProblemsArgs {
    #[command(subcommand)]
    action: Option<ProblemsAction>,
}

#[derive(Subcommand)]
enum ProblemsAction {
    /// Print the registry: id, dimension, residual count, notes.
    List,
}

#[derive(Args)]
struct ValidateArgs {
    /// Shrink the Monte-Carlo draw counts for a fast smoke check.
    #[arg(long)]
    quick: bool,
    /// Also validate a logreg instance built from this LIBSVM file.
    #[arg(long)]
    data: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn usage(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }

    fn runtime(e: Error) -> Self {
        Failure::Runtime(e.to_string())
    }

    /// File-content and execution problems are runtime failures; bad
    /// parameters are usage errors.
    fn from_error(e: Error) -> Self {
        match &e {
            Error::InvalidParameter { .. } | Error::UnknownProblem { .. } => Failure::usage(e),
            _ => Failure::runtime(e),
        }
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Tune(args) => cmd_tune(args),
        Cmd::Aggregate(args) => cmd_aggregate(args),
        Cmd::Problems(args) => cmd_problems(args),
        Cmd::Validate(args) => cmd_validate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Explicit flag, then ZOGRAD_SEED, then 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("ZOGRAD_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("ZOGRAD_SEED is not a valid seed: {v:?}"))),
        Err(_) => Ok(0),
    }
}

/// Protocol default initial batch: 2, but 10% of the data for finite sums.
fn default_s0(problem: &dyn StochasticProblem) -> usize {
    match problem.info().num_data {
        Some(n) => (n.div_ceil(10)).max(2),
        None => 2,
    }
}

fn default_sample_cap(problem: &dyn StochasticProblem, s0: usize) -> usize {
    match problem.info().num_data {
        Some(n) => n.max(s0),
        None => 1_000_000,
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let problem = args.problem.build()?;
    let s0 = args.s0.unwrap_or_else(|| default_s0(problem.as_ref()));
    let config = RunConfig {
        method: args.method,
        num_dirs: args.num_dirs.unwrap_or_else(|| problem.dim()),
        nu: args.nu,
        alpha: args.alpha,
        theta: args.theta,
        s0,
        budget: args.budget,
        seed: resolve_seed(args.seed)?,
        sample_cap: args
            .sample_cap
            .unwrap_or_else(|| default_sample_cap(problem.as_ref(), s0)),
        x0: None,
        max_iters: args.max_iters,
    };
    let trace = run(problem.as_ref(), &config).map_err(Failure::from_error)?;
    trace.write_csv(&args.out).map_err(Failure::runtime)?;
    println!("wrote {}", args.out.display());
    println!("final_gap {:e}", trace.final_gap());
    println!("total_evals {}", trace.total_evals());
    match &trace.status {
        RunStatus::Complete => Ok(()),
        RunStatus::Aborted(reason) => Err(Failure::Runtime(format!(
            "run aborted after {} iterations: {reason} (partial trace written)",
            trace.records.len()
        ))),
    }
}

fn in_pool<T: Send>(jobs: Option<usize>, work: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    match jobs {
        None => Ok(work()),
        Some(n) => {
            if n == 0 {
                return Err(Failure::Usage("--jobs must be positive".into()));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure::Runtime(format!("cannot build worker pool: {e}")))?;
            Ok(pool.install(work))
        }
    }
}

fn cmd_tune(args: TuneArgs) -> Result<(), Failure> {
    let problem = args.problem.build()?;
    let method = args.method;
    let d = problem.dim();
    let mut spec = TuningSpec::default_grid(method, d, args.budget);
    if let Some(ns) = args.grid_num_dirs {
        spec.num_dirs = ns;
    }
    if let Some(nus) = args.grid_nu {
        spec.nus = nus;
    }
    if let Some(alphas) = args.grid_alpha {
        spec.alphas = alphas;
    }
    spec.theta = args.theta;
    spec.s0 = args.s0.unwrap_or_else(|| default_s0(problem.as_ref()));
    spec.sample_cap = args
        .sample_cap
        .unwrap_or_else(|| default_sample_cap(problem.as_ref(), spec.s0));
    spec.master_seed = resolve_seed(args.master_seed)?;

    let (outcome, traces) = in_pool(args.jobs, || {
        let outcome = tune(problem.as_ref(), method, &spec)?;
        let traces = final_runs(problem.as_ref(), method, &outcome, &spec)?;
        Ok::<_, Error>((outcome, traces))
    })?
    .map_err(Failure::from_error)?;

    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", args.out_dir.display())))?;
    let stem = format!("{}_{}", problem.info().id, method);
    for trace in &traces {
        let path = args.out_dir.join(format!("{stem}_seed{}.csv", trace.header.seed));
        trace.write_csv(&path).map_err(Failure::runtime)?;
    }
    let summary = aggregate(&traces).map_err(Failure::runtime)?;
    let summary_path = args.out_dir.join(format!("{stem}_summary.csv"));
    summary.write_csv(&summary_path).map_err(Failure::runtime)?;

    println!(
        "best num_dirs={} nu={:e} alpha={:e}",
        outcome.best.num_dirs, outcome.best.nu, outcome.best.alpha
    );
    for point in &outcome.flagged {
        println!(
            "flagged: num_dirs={} nu={:e} alpha={:e} aborted during tuning",
            point.num_dirs, point.nu, point.alpha
        );
    }
    println!("wrote {} traces and {}", traces.len(), summary_path.display());
    Ok(())
}

fn cmd_aggregate(args: AggregateArgs) -> Result<(), Failure> {
    let paths = glob::glob(&args.glob)
        .map_err(|e| Failure::Usage(format!("bad glob pattern {:?}: {e}", args.glob)))?;
    let mut files: Vec<PathBuf> = Vec::new();
    for entry in paths {
        files.push(entry.map_err(|e| Failure::Runtime(e.to_string()))?);
    }
    files.sort();
    if files.is_empty() {
        return Err(Failure::Runtime(format!("no traces match {:?}", args.glob)));
    }
    let mut traces: Vec<RunTrace> = Vec::with_capacity(files.len());
    for path in &files {
        traces.push(RunTrace::read_csv(path).map_err(Failure::runtime)?);
    }
    let summary: AggregateSummary = if args.force {
        aggregate_unchecked(&traces)
    } else {
        aggregate(&traces).map_err(|e| {
            Failure::Runtime(format!("{e} (pass --force to aggregate anyway)"))
        })?
    };
    summary.write_csv(&args.out).map_err(Failure::runtime)?;
    println!(
        "aggregated {} traces into {} ({} checkpoints)",
        traces.len(),
        args.out.display(),
        summary.rows.len()
    );
    Ok(())
}

fn cmd_problems(args: ProblemsArgs) -> Result<(), Failure> {
    match args.action.unwrap_or(ProblemsAction::List) {
        ProblemsAction::List => {
            let show = |v: Option<usize>| v.map_or("-".to_string(), |v| v.to_string());
            println!("{:<12} {:>5} {:>5}  notes", "id", "d", "p");
            for entry in registry() {
                println!(
                    "{:<12} {:>5} {:>5}  {}",
                    entry.id,
                    show(entry.dim),
                    show(entry.num_residuals),
                    entry.notes
                );
            }
            Ok(())
        }
    }
}

fn cmd_validate(args: ValidateArgs) -> Result<(), Failure> {
    let mut reports = validate::run_all(args.quick).map_err(Failure::from_error)?;
    if let Some(path) = &args.data {
        let problem = make_logreg(path, LogRegOptions::default()).map_err(Failure::runtime)?;
        let draws = if args.quick { 20_000 } else { 1_000_000 };
        reports.push(validate::oracle_unbiasedness(&problem, draws, 900));
        reports.push(validate::gradient_consistency(&problem, 901));
    }
    let mut failures = 0;
    for r in &reports {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        println!("{tag} {:<32} {}", r.name, r.detail);
        if !r.passed {
            failures += 1;
        }
    }
    println!("{} checks, {} failed", reports.len(), failures);
    if failures == 0 {
        Ok(())
    } else {
        Err(Failure::Runtime(format!("{failures} checks failed")))
    }
}
