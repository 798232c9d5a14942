//! The experimental protocol: grid tuning with worst-of-3 selection over 3
//! seeds, 17 further seeded runs of the winner, and quantile aggregation of
//! all 20 traces onto a common evaluation-count grid.
//!
//! Every derived seed comes from the master seed, so a (problem, method,
//! spec) triple determines every output byte; runs are independent jobs
//! executed on a work pool, with results collected in job order so the
//! schedule cannot leak into the artifacts.

use rayon::prelude::*;

use crate::directions::Method;
use crate::error::{Error, Result};
use crate::optimizer::{run, RunConfig};
use crate::problems::StochasticProblem;
use crate::rng::derive_seeds;
use crate::trace::{fmt_float, RunStatus, RunTrace};

pub const N_TUNING_SEEDS: usize = 3;
pub const N_FINAL_SEEDS: usize = 17;
pub const N_TOTAL_RUNS: usize = N_TUNING_SEEDS + N_FINAL_SEEDS;

/// Number of points in the common evaluation-count grid used by [`aggregate`].
pub const N_CHECKPOINTS: usize = 200;

pub const SUMMARY_MAGIC: &str = "# zograd summary v1";
pub const SUMMARY_COLUMNS: &str = "cum_evals,gap_med,gap_q35,gap_q65,batch_med,batch_q35,batch_q65";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub num_dirs: usize,
    pub nu: f64,
    pub alpha: f64,
}

/// The tunable grid plus the fixed protocol parameters.
#[derive(Debug, Clone)]
pub struct TuningSpec {
    pub num_dirs: Vec<usize>,
    pub nus: Vec<f64>,
    pub alphas: Vec<f64>,
    pub theta: f64,
    pub s0: usize,
    pub budget: u64,
    pub sample_cap: usize,
    pub master_seed: u64,
}

impl TuningSpec {
    /// The default coarse log grids: N in {2, ceil(d/4), ceil(d/2), d}
    /// (deduplicated; cfd always uses all d directions, so its N grid is a
    /// single point), nu in {1e-1, 1e-2, 1e-3}, alpha spanning 1 down to
    /// 1e-5. The alpha grid reaches low because ill-scaled objectives (the
    /// quartic chain has curvature ~1e4 at its start) diverge under every
    /// step size above ~1e-4; the tuner needs at least one contracting
    /// candidate to do its job.
    pub fn default_grid(method: Method, d: usize, budget: u64) -> Self {
        let num_dirs = if method == Method::Cfd {
            vec![d]
        } else {
            let mut ns = vec![2, d.div_ceil(4), d.div_ceil(2), d];
            ns.sort_unstable();
            ns.dedup();
            ns
        };
        TuningSpec {
            num_dirs,
            nus: vec![1e-1, 1e-2, 1e-3],
            alphas: vec![1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5],
            theta: 0.9,
            s0: 2,
            budget,
            sample_cap: 1_000_000,
            master_seed: 0,
        }
    }

    fn validate(&self, method: Method, d: usize) -> Result<()> {
        if self.num_dirs.is_empty() || self.nus.is_empty() || self.alphas.is_empty() {
            return Err(Error::invalid("grid", "every grid axis must be non-empty"));
        }
        for &n in &self.num_dirs {
            if n == 0 {
                return Err(Error::invalid("grid", "num_dirs values must be positive"));
            }
            if matches!(method, Method::Crc | Method::Crs) && n > d {
                return Err(Error::invalid(
                    "grid",
                    format!("num_dirs {n} exceeds dimension {d} for {method}"),
                ));
            }
        }
        if self.nus.iter().chain(&self.alphas).any(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(Error::invalid("grid", "nu and alpha values must be positive"));
        }
        Ok(())
    }

    fn points(&self, method: Method, d: usize) -> Vec<GridPoint> {
        let mut ns: Vec<usize> = self
            .num_dirs
            .iter()
            .map(|&n| method.effective_num_dirs(d, n))
            .collect();
        ns.sort_unstable();
        ns.dedup();
        let mut points = Vec::new();
        for &num_dirs in &ns {
            for &nu in &self.nus {
                for &alpha in &self.alphas {
                    points.push(GridPoint { num_dirs, nu, alpha });
                }
            }
        }
        points
    }

    fn config(&self, method: Method, point: GridPoint, seed: u64) -> RunConfig {
        RunConfig {
            method,
            num_dirs: point.num_dirs,
            nu: point.nu,
            alpha: point.alpha,
            theta: self.theta,
            s0: self.s0,
            budget: self.budget,
            seed,
            sample_cap: self.sample_cap,
            x0: None,
            max_iters: None,
        }
    }
}

#[derive(Debug)]
pub struct TuneOutcome {
    pub best: GridPoint,
    /// Worst-of-3 score per grid point, in grid order; aborted points carry
    /// `f64::INFINITY`.
    pub scores: Vec<(GridPoint, f64)>,
    /// Grid points where at least one tuning run aborted.
    pub flagged: Vec<GridPoint>,
    /// The three tuning traces of the winning point, in tuning-seed order.
    pub tuning_traces: Vec<RunTrace>,
}

/// The seeds used by `tune` (first 3) and `final_runs` (next 17). Derived by
/// a bijective mix of the master seed, so the two lists never collide.
pub fn protocol_seeds(master_seed: u64) -> (Vec<u64>, Vec<u64>) {
    let mut seeds = derive_seeds(master_seed, N_TOTAL_RUNS);
    let finals = seeds.split_off(N_TUNING_SEEDS);
    (seeds, finals)
}

/// A run's contribution to the worst-of-3 score: the final optimality gap,
/// or +inf when the run aborted or produced a non-finite gap.
fn score_of(trace: &RunTrace) -> f64 {
    match trace.status {
        RunStatus::Complete => {
            let gap = trace.final_gap();
            if gap.is_nan() {
                f64::INFINITY
            } else {
                gap
            }
        }
        RunStatus::Aborted(_) => f64::INFINITY,
    }
}

/// Minimum score wins; ties go to smaller N, then smaller nu, then smaller
/// alpha, so selection is deterministic whatever the grid order.
fn select_best(scores: &[(GridPoint, f64)]) -> GridPoint {
    let mut ranked: Vec<&(GridPoint, f64)> = scores.iter().collect();
    ranked.sort_by(|(a, _), (b, _)| {
        a.num_dirs
            .cmp(&b.num_dirs)
            .then(a.nu.total_cmp(&b.nu))
            .then(a.alpha.total_cmp(&b.alpha))
    });
    let mut best = ranked[0];
    for cand in &ranked[1..] {
        if cand.1 < best.1 {
            best = cand;
        }
    }
    best.0
}

/// Runs every grid point on the three tuning seeds and picks the point whose
/// *worst* final gap is smallest.
pub fn tune(
    problem: &dyn StochasticProblem,
    method: Method,
    spec: &TuningSpec,
) -> Result<TuneOutcome> {
    let d = problem.dim();
    spec.validate(method, d)?;
    let (tuning_seeds, _) = protocol_seeds(spec.master_seed);
    let points = spec.points(method, d);

    let jobs: Vec<(GridPoint, u64)> = points
        .iter()
        .flat_map(|&p| tuning_seeds.iter().map(move |&s| (p, s)))
        .collect();
    let traces: Vec<RunTrace> = jobs
        .par_iter()
        .map(|&(point, seed)| run(problem, &spec.config(method, point, seed)))
        .collect::<Result<_>>()?;

    let mut scores = Vec::with_capacity(points.len());
    let mut flagged = Vec::new();
    for (i, &point) in points.iter().enumerate() {
        let runs = &traces[i * N_TUNING_SEEDS..(i + 1) * N_TUNING_SEEDS];
        let score = runs.iter().map(score_of).fold(f64::NEG_INFINITY, f64::max);
        if runs.iter().any(|t| matches!(t.status, RunStatus::Aborted(_))) {
            flagged.push(point);
        }
        scores.push((point, score));
    }

    let best = select_best(&scores);
    let best_idx = points.iter().position(|&p| p == best).unwrap();
    let tuning_traces =
        traces[best_idx * N_TUNING_SEEDS..(best_idx + 1) * N_TUNING_SEEDS].to_vec();
    Ok(TuneOutcome {
        best,
        scores,
        flagged,
        tuning_traces,
    })
}

/// The 17 additional seeded runs of the winning point, prepended with the 3
/// tuning traces already in hand: 20 traces total, in seed order.
pub fn final_runs(
    problem: &dyn StochasticProblem,
    method: Method,
    outcome: &TuneOutcome,
    spec: &TuningSpec,
) -> Result<Vec<RunTrace>> {
    let (tuning_seeds, final_seeds) = protocol_seeds(spec.master_seed);
    debug_assert!(final_seeds.iter().all(|s| !tuning_seeds.contains(s)));
    let mut traces = outcome.tuning_traces.clone();
    let extra: Vec<RunTrace> = final_seeds
        .par_iter()
        .map(|&seed| run(problem, &spec.config(method, outcome.best, seed)))
        .collect::<Result<_>>()?;
    traces.extend(extra);
    Ok(traces)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub cum_evals: u64,
    pub gap_med: f64,
    pub gap_q35: f64,
    pub gap_q65: f64,
    pub batch_med: f64,
    pub batch_q35: f64,
    pub batch_q65: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateSummary {
    /// Shared config fingerprint of the aggregated traces (seed excluded).
    pub config_key: String,
    pub n_runs: usize,
    pub rows: Vec<SummaryRow>,
}

/// Linear-interpolation quantile of an ascending slice:
/// position (n-1)q between order statistics.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// The traces' shared config fingerprint; an error names the offender if the
/// inputs mix configurations (aggregating across configs is meaningless).
pub fn check_uniform_config(traces: &[RunTrace]) -> Result<String> {
    let first = traces
        .first()
        .ok_or_else(|| Error::invalid("traces", "need at least one trace"))?;
    let key = first.header.config_key();
    for t in &traces[1..] {
        if t.header.config_key() != key {
            return Err(Error::ContractViolation(format!(
                "mixed configs in aggregation: {} vs {}",
                key,
                t.header.config_key()
            )));
        }
    }
    Ok(key)
}

/// Resamples every trace onto a shared evaluation-count grid (200 log-spaced
/// checkpoints from the first-iteration cost to the budget) by carrying the
/// last observation forward — traces are step functions in evaluation count —
/// then takes median/q35/q65 of gap and batch size per checkpoint.
pub fn aggregate(traces: &[RunTrace]) -> Result<AggregateSummary> {
    let config_key = check_uniform_config(traces)?;
    Ok(aggregate_as(traces, config_key))
}

/// Like [`aggregate`], but proceeds on mixed configurations (the checkpoint
/// grid then comes from the first trace) and labels the summary accordingly.
/// Panics on an empty slice.
pub fn aggregate_unchecked(traces: &[RunTrace]) -> AggregateSummary {
    let key = match check_uniform_config(traces) {
        Ok(key) => key,
        Err(_) => format!("mixed ({} configs)", {
            let mut keys: Vec<String> = traces.iter().map(|t| t.header.config_key()).collect();
            keys.sort();
            keys.dedup();
            keys.len()
        }),
    };
    aggregate_as(traces, key)
}

fn aggregate_as(traces: &[RunTrace], config_key: String) -> AggregateSummary {
    let header = &traces[0].header;
    let lo = (2 * header.num_dirs * header.s0) as u64;
    let hi = header.budget.max(lo);

    let mut checkpoints = Vec::with_capacity(N_CHECKPOINTS);
    let (ln_lo, ln_hi) = ((lo as f64).ln(), (hi as f64).ln());
    for i in 0..N_CHECKPOINTS {
        let t = i as f64 / (N_CHECKPOINTS - 1) as f64;
        let c = (ln_lo + t * (ln_hi - ln_lo)).exp().round() as u64;
        checkpoints.push(c.clamp(lo, hi));
    }
    checkpoints.dedup();

    let mut rows = Vec::with_capacity(checkpoints.len());
    let mut cursors = vec![0usize; traces.len()];
    let mut gaps = vec![0.0; traces.len()];
    let mut batches = vec![0.0; traces.len()];
    for &c in &checkpoints {
        for (t, trace) in traces.iter().enumerate() {
            let recs = &trace.records;
            let mut i = cursors[t];
            while i < recs.len() && recs[i].cum_evals <= c {
                i += 1;
            }
            cursors[t] = i;
            // i is the first record past c; before the first record the run
            // sits at the start point with the initial batch size
            let (gap, batch) = if i == 0 {
                (trace.header.gap0, trace.header.s0 as f64)
            } else {
                (recs[i - 1].gap, recs[i - 1].batch_size as f64)
            };
            gaps[t] = gap;
            batches[t] = batch;
        }
        let mut g = gaps.clone();
        let mut b = batches.clone();
        g.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        rows.push(SummaryRow {
            cum_evals: c,
            gap_med: quantile(&g, 0.5),
            gap_q35: quantile(&g, 0.35),
            gap_q65: quantile(&g, 0.65),
            batch_med: quantile(&b, 0.5),
            batch_q35: quantile(&b, 0.35),
            batch_q65: quantile(&b, 0.65),
        });
    }
    AggregateSummary {
        config_key,
        n_runs: traces.len(),
        rows,
    }
}

impl AggregateSummary {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(SUMMARY_MAGIC);
        out.push('\n');
        out.push_str(&format!("# runs={}\n", self.n_runs));
        out.push_str(&format!("# config={}\n", self.config_key));
        out.push_str(SUMMARY_COLUMNS);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.cum_evals,
                fmt_float(r.gap_med),
                fmt_float(r.gap_q35),
                fmt_float(r.gap_q65),
                fmt_float(r.batch_med),
                fmt_float(r.batch_q35),
                fmt_float(r.batch_q65),
            ));
        }
        out
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path.to_path_buf(), e))
    }
}
