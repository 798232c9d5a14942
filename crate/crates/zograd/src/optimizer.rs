//! The fixed-step zeroth-order iteration under an evaluation budget.
//!
//! Each iteration: sample a direction set, draw a fresh batch of realizations
//! (size carried over from the previous iteration), estimate the gradient,
//! apply the norm test with one-shot growth on failure, record the iterate,
//! then step `x <- x - alpha g`. The run stops when the *next* iteration's
//! minimum cost `2 |T| |S|` would exceed the remaining budget; growth inside
//! an iteration may overshoot the budget, which is allowed and recorded
//! truthfully — truncating a batch mid-estimate would bias the estimator.
//!
//! Apart from the wall-clock column, a trace is a deterministic function of
//! `(problem, config)`: directions and realizations are drawn from separate
//! ChaCha streams of the run seed, so the two sequences cannot perturb one
//! another.

use std::time::Instant;

use crate::adaptive::{grow_samples, norm_test};
use crate::directions::{sample_directions, Method};
use crate::error::{Error, Result};
use crate::estimators::estimate_gradient;
use crate::linalg::{axpy, norm};
use crate::problems::StochasticProblem;
use crate::rng::{stream_rng, STREAM_DIRECTIONS, STREAM_REALIZATIONS};
use crate::trace::{IterRecord, RunStatus, RunTrace, TraceHeader};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub method: Method,
    /// Directions per iteration; ignored by cfd, which always uses `d`.
    pub num_dirs: usize,
    pub nu: f64,
    pub alpha: f64,
    pub theta: f64,
    /// Initial batch size (at least 2: the sample variance needs two points).
    pub s0: usize,
    /// Total stochastic-oracle call allowance.
    pub budget: u64,
    pub seed: u64,
    /// Hard ceiling on the batch size.
    pub sample_cap: usize,
    /// Starting point; defaults to the problem's standard start.
    pub x0: Option<Vec<f64>>,
    /// Optional iteration cap on top of the budget (for fixed-K experiments).
    pub max_iters: Option<u64>,
}

impl RunConfig {
    /// A config with the experiment-protocol defaults (`theta` 0.9, `s0` 2,
    /// cap 10^6); method, geometry, and budget still come from the caller.
    pub fn new(method: Method, num_dirs: usize, nu: f64, alpha: f64, budget: u64) -> Self {
        RunConfig {
            method,
            num_dirs,
            nu,
            alpha,
            theta: 0.9,
            s0: 2,
            budget,
            seed: 0,
            sample_cap: 1_000_000,
            x0: None,
            max_iters: None,
        }
    }

    pub fn effective_num_dirs(&self, d: usize) -> usize {
        self.method.effective_num_dirs(d, self.num_dirs)
    }

    fn validate(&self, problem: &dyn StochasticProblem) -> Result<()> {
        let d = problem.dim();
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::invalid("alpha", "must be finite and > 0"));
        }
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return Err(Error::invalid("nu", "must be finite and > 0"));
        }
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(Error::invalid("theta", "must be finite and > 0"));
        }
        if self.s0 < 2 {
            return Err(Error::invalid(
                "s0",
                "initial batch must hold at least 2 realizations",
            ));
        }
        if self.sample_cap < self.s0 {
            return Err(Error::invalid("sample_cap", "must be at least s0"));
        }
        if self.method.is_randomized() && self.num_dirs == 0 {
            return Err(Error::invalid("num_dirs", "must be positive"));
        }
        if matches!(self.method, Method::Crc | Method::Crs) && self.num_dirs > d {
            return Err(Error::invalid(
                "num_dirs",
                format!("{} requires num_dirs <= d = {d}", self.method),
            ));
        }
        let min_cost = 2 * self.effective_num_dirs(d) as u64 * self.s0 as u64;
        if self.budget < min_cost {
            return Err(Error::invalid(
                "budget",
                format!("must cover at least one iteration (2 |T| s0 = {min_cost})"),
            ));
        }
        if let Some(x0) = &self.x0 {
            if x0.len() != d {
                return Err(Error::invalid(
                    "x0",
                    format!("length {} != problem dimension {d}", x0.len()),
                ));
            }
        }
        Ok(())
    }
}

/// Reference step size from the convergence analysis:
/// `Omega_1 = 1 / (4 (1 + theta^2) L)` for cfd, damped by `N/(N + 4.5 d)`
/// for the Gaussian and sphere schemes and by `N/d` for the subset schemes.
/// A guide for defaults and test oracles; runs always use `config.alpha`.
pub fn reference_step_size(method: Method, d: usize, n: usize, theta: f64, l: f64) -> f64 {
    assert!(l > 0.0, "need a positive Lipschitz constant");
    let omega1 = 1.0 / (4.0 * (1.0 + theta * theta) * l);
    let (d, n) = (d as f64, n as f64);
    match method {
        Method::Cfd => omega1,
        Method::Cgs | Method::Css => n / (n + 4.5 * d) * omega1,
        Method::Crc | Method::Crs => n / d * omega1,
    }
}

/// Executes one run. `Err` means the configuration was rejected; oracle
/// failures mid-run produce an `Ok` trace with aborted status and the records
/// of every completed iteration.
pub fn run(problem: &dyn StochasticProblem, config: &RunConfig) -> Result<RunTrace> {
    config.validate(problem)?;
    let d = problem.dim();
    let f_star = problem.f_star();
    let mut x = config.x0.clone().unwrap_or_else(|| problem.x0());
    let f0 = problem.f_exact(&x);

    let header = TraceHeader {
        problem: problem.info().id.clone(),
        method: config.method,
        dim: d,
        num_dirs: config.effective_num_dirs(d),
        nu: config.nu,
        alpha: config.alpha,
        theta: config.theta,
        s0: config.s0,
        budget: config.budget,
        sample_cap: config.sample_cap,
        seed: config.seed,
        f_star,
        f0,
        gap0: f0 - f_star,
        extra: problem.info().metadata.clone(),
    };

    let mut dir_rng = stream_rng(config.seed, STREAM_DIRECTIONS);
    let mut zeta_rng = stream_rng(config.seed, STREAM_REALIZATIONS);
    let t_eff = config.effective_num_dirs(d) as u64;
    let mut batch = config.s0;
    let mut cum_evals: u64 = 0;
    let mut records = Vec::new();
    let started = Instant::now();
    let mut k: u64 = 0;

    macro_rules! abort_on_err {
        ($expr:expr) => {
            match $expr {
                Ok(v) => v,
                Err(e) => {
                    return Ok(RunTrace {
                        header,
                        records,
                        status: RunStatus::Aborted(e.to_string()),
                    })
                }
            }
        };
    }

    loop {
        if config.max_iters.is_some_and(|m| k >= m) {
            break;
        }
        if cum_evals + 2 * t_eff * batch as u64 > config.budget {
            break;
        }

        let dirs = abort_on_err!(sample_directions(
            config.method,
            d,
            config.num_dirs,
            &mut dir_rng
        ));
        let zetas: Vec<_> = (0..batch).map(|_| problem.draw_zeta(&mut zeta_rng)).collect();
        let estimate = abort_on_err!(estimate_gradient(problem, &x, &dirs, &zetas, config.nu));
        let test = abort_on_err!(norm_test(&estimate, config.theta));
        let estimate = if test.passed {
            estimate
        } else {
            abort_on_err!(grow_samples(
                estimate,
                &test,
                problem,
                &x,
                &dirs,
                config.nu,
                &mut zeta_rng,
                config.sample_cap,
            ))
            .estimate
        };

        batch = estimate.num_samples();
        cum_evals += estimate.evals_used;
        let f = problem.f_exact(&x);
        records.push(IterRecord {
            iter: k,
            cum_evals,
            f,
            gap: f - f_star,
            batch_size: batch as u64,
            grad_norm: norm(&estimate.mean),
            wall_ms: started.elapsed().as_millis() as u64,
        });

        axpy(-config.alpha, &estimate.mean, &mut x);
        k += 1;
    }

    Ok(RunTrace {
        header,
        records,
        status: RunStatus::Complete,
    })
}
