//! The practical norm test and sample-size growth.
//!
//! An estimate built from realizations `S` passes the test at parameter
//! `theta` when
//!
//! `Var_{zeta in S}(g_zeta) / |S| <= theta^2 ||g_S||^2`
//!
//! with the unbiased sample variance `Var = (1/(|S|-1)) sum_i ||g_i - g_mean||^2`
//! taken over the full sample set (it costs nothing extra — the per-sample
//! estimates already exist). On failure the batch is grown to
//! `ceil(Var / (theta^2 ||g_S||^2))` in one shot: no re-test inside the
//! iteration, and the estimate is extended rather than rebuilt, so the draws
//! already paid for are kept.
//!
//! Degenerate case: `||g_S|| = 0` makes the test ratio undefined; the test is
//! declared passed (taking a zero step is sound, growing the batch on an
//! undefined ratio is not), with `required_size` reported as the current size.

use rand_chacha::ChaCha8Rng;

use crate::directions::DirectionSet;
use crate::error::{Error, Result};
use crate::estimators::{extend_estimate, GradientEstimate};
use crate::linalg::{dist_sq, norm_sq};
use crate::problems::StochasticProblem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormTestResult {
    pub passed: bool,
    /// Unbiased sample variance of the per-realization estimates.
    pub sample_variance: f64,
    /// `sample_variance / |S|`.
    pub lhs: f64,
    /// `theta^2 ||g||^2`.
    pub rhs: f64,
    /// Batch size the growth rule asks for (current size when passed or
    /// degenerate).
    pub required_size: usize,
}

pub fn norm_test(estimate: &GradientEstimate, theta: f64) -> Result<NormTestResult> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::invalid("theta", "must be finite and > 0"));
    }
    let n = estimate.per_sample.len();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }

    let mean = &estimate.mean;
    let sample_variance = estimate
        .per_sample
        .iter()
        .map(|g| dist_sq(g, mean))
        .sum::<f64>()
        / (n - 1) as f64;
    let lhs = sample_variance / n as f64;
    let g_sq = norm_sq(mean);

    if g_sq == 0.0 {
        return Ok(NormTestResult {
            passed: true,
            sample_variance,
            lhs,
            rhs: 0.0,
            required_size: n,
        });
    }

    let rhs = theta * theta * g_sq;
    let required_size = (sample_variance / rhs).ceil().max(1.0) as usize;
    Ok(NormTestResult {
        passed: lhs <= rhs,
        sample_variance,
        lhs,
        rhs,
        required_size,
    })
}

/// Result of one growth attempt.
#[derive(Debug)]
pub struct Growth {
    pub estimate: GradientEstimate,
    /// Realizations actually appended.
    pub appended: usize,
    /// The requested size exceeded the cap (or the cap was already reached).
    pub cap_hit: bool,
}

/// Grows the batch to `min(test.required_size, cap)` by drawing fresh
/// realizations and extending the estimate. One-shot: the caller must not
/// re-test within the same iteration. A passed test is a no-op.
#[allow(clippy::too_many_arguments)]
pub fn grow_samples(
    estimate: GradientEstimate,
    test: &NormTestResult,
    problem: &dyn StochasticProblem,
    x: &[f64],
    dirs: &DirectionSet,
    nu: f64,
    rng: &mut ChaCha8Rng,
    cap: usize,
) -> Result<Growth> {
    if test.passed {
        return Ok(Growth {
            estimate,
            appended: 0,
            cap_hit: false,
        });
    }
    let current = estimate.num_samples();
    let cap_hit = test.required_size > cap || current >= cap;
    let target = test.required_size.min(cap);
    if target <= current {
        return Ok(Growth {
            estimate,
            appended: 0,
            cap_hit,
        });
    }
    let new_samples: Vec<_> = (0..target - current)
        .map(|_| problem.draw_zeta(rng))
        .collect();
    let estimate = extend_estimate(estimate, problem, x, dirs, &new_samples, nu)?;
    Ok(Growth {
        estimate,
        appended: new_samples.len(),
        cap_hit,
    })
}
