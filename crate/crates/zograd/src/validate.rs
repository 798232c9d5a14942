//! Self-contained correctness checks runnable from the CLI: exact analytic
//! identities of the estimator, Monte-Carlo unbiasedness of the direction
//! schemes and of every registered stochastic oracle, and common-random-number
//! cancellation. Each check owns its seeds, so a report is reproducible.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::directions::{sample_directions, Method};
use crate::error::Result;
use crate::estimators::{bias_bound, estimate_gradient};
use crate::linalg::{dist_sq, norm};
use crate::problems::synthetic::{Affine, CubicSum, DYADIC_VALUES};
use crate::problems::{make_nlls, make_stochastic_quadratic, NoiseModel, StochasticProblem, Zeta, NLLS_NAMES};
use crate::rng::{stream_rng, STREAM_GENERAL};

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckReport {
    fn new(name: impl Into<String>, passed: bool, detail: String) -> Self {
        CheckReport {
            name: name.into(),
            passed,
            detail,
        }
    }
}

fn test_vector(d: usize) -> Vec<f64> {
    let base = [1.3, -0.7, 0.25, 2.0, -1.1, 0.6, -0.2, 0.9, 1.7, -1.5];
    (0..d).map(|i| base[i % base.len()]).collect()
}

/// On a noiseless linear function the full central-difference scheme has zero
/// truncation error and zero variance: each slope is recovered to roundoff.
pub fn affine_exactness() -> CheckReport {
    let d = 10;
    let a = test_vector(d);
    let problem = Affine::noiseless(a.clone());
    let mut worst = 0.0f64;
    for nu in [1.0, 1e-3] {
        let dirs = sample_directions(Method::Cfd, d, d, &mut stream_rng(0, STREAM_GENERAL))
            .expect("canonical directions");
        let est = estimate_gradient(&problem, &vec![0.0; d], &dirs, &[Zeta::Noise(vec![0.0; d])], nu)
            .expect("affine evaluation");
        for (g, &aj) in est.mean.iter().zip(&a) {
            worst = worst.max(((g - aj) / aj).abs());
        }
    }
    CheckReport::new(
        "affine-exactness",
        worst <= 1e-13,
        format!("worst relative slope error {worst:.3e} (tolerance 1e-13)"),
    )
}

/// Monte-Carlo mean of a randomized scheme's estimate on a linear function,
/// fresh directions per draw: must converge to the slope vector.
pub fn direction_unbiasedness(method: Method, draws: usize) -> CheckReport {
    let (d, n) = (10, 2);
    let a = test_vector(d);
    let problem = Affine::noiseless(a.clone());
    let x = vec![0.0; d];
    let mut rng = stream_rng(1000 + method as u64, STREAM_GENERAL);
    let mut acc = vec![0.0; d];
    for _ in 0..draws {
        let dirs = sample_directions(method, d, n, &mut rng).expect("direction sample");
        let est = estimate_gradient(&problem, &x, &dirs, &[Zeta::Noise(vec![0.0; d])], 1e-2)
            .expect("affine evaluation");
        for (s, g) in acc.iter_mut().zip(&est.mean) {
            *s += g;
        }
    }
    for s in &mut acc {
        *s /= draws as f64;
    }
    let rel = (dist_sq(&acc, &a)).sqrt() / norm(&a);
    let tol = 2e-2 * (1e5 / draws as f64).sqrt();
    CheckReport::new(
        format!("unbiasedness-{method}"),
        rel <= tol,
        format!("{draws} draws, relative deviation {rel:.3e} (tolerance {tol:.1e})"),
    )
}

/// On F = sum x_i^3 the cfd estimate at the origin has bias exactly nu^2 in
/// every coordinate, so the error norm must *equal* the bias bound
/// sqrt(d) M nu^2 / 6 with M = 6, not merely sit below it.
pub fn bias_bound_equality() -> CheckReport {
    let mut worst = 0.0f64;
    for d in [1, 5, 20] {
        let problem = CubicSum::new(d);
        let x = vec![0.0; d];
        for nu in [0.1, 0.01] {
            let dirs = sample_directions(Method::Cfd, d, d, &mut stream_rng(0, STREAM_GENERAL))
                .expect("canonical directions");
            let est = estimate_gradient(&problem, &x, &dirs, &[Zeta::Noise(vec![])], nu)
                .expect("cubic evaluation");
            let err = dist_sq(&est.mean, &problem.grad_exact(&x)).sqrt();
            let bound = bias_bound(Method::Cfd, d, nu, 6.0);
            worst = worst.max(((err - bound) / bound).abs());
        }
    }
    CheckReport::new(
        "bias-bound-equality",
        worst <= 1e-10,
        format!("worst relative mismatch {worst:.3e} (tolerance 1e-10)"),
    )
}

/// With every input a power of two, additive noise cancels *bitwise* between
/// the two sides of a central difference: the noisy per-sample estimates must
/// be bit-identical to the noiseless one.
pub fn crn_cancellation() -> CheckReport {
    let d = 6;
    let a: Vec<f64> = vec![1.5, -2.0, 0.5, 1.0, -0.25, 2.0];
    let c: Vec<f64> = vec![2.0, -1.0, 0.5, -0.5, 1.0, -2.0];
    let x: Vec<f64> = vec![0.5, -1.0, 2.0, 0.25, -0.5, 1.0];
    let nu = 0.25;
    let noiseless = Affine::noiseless(a.clone());
    let noisy = Affine::with_noise(a, c);
    let dirs = sample_directions(Method::Cfd, d, d, &mut stream_rng(0, STREAM_GENERAL))
        .expect("canonical directions");
    let clean = estimate_gradient(&noiseless, &x, &dirs, &[Zeta::Noise(vec![0.0; d])], nu)
        .expect("noiseless evaluation");
    let mut rng = stream_rng(7, STREAM_GENERAL);
    let mut all_bit_equal = true;
    for _ in 0..5 {
        let z: Vec<f64> = (0..d)
            .map(|_| DYADIC_VALUES[rng.random_range(0..DYADIC_VALUES.len())])
            .collect();
        let est = estimate_gradient(&noisy, &x, &dirs, &[Zeta::Noise(z)], nu)
            .expect("noisy evaluation");
        all_bit_equal &= est
            .mean
            .iter()
            .zip(&clean.mean)
            .all(|(p, q)| p.to_bits() == q.to_bits());
    }
    CheckReport::new(
        "crn-cancellation",
        all_bit_equal,
        if all_bit_equal {
            "noisy per-sample estimates bit-identical to noiseless".into()
        } else {
            "bit mismatch between noisy and noiseless estimates".into()
        },
    )
}

/// Each coordinate should land in a random-coordinate direction set with
/// frequency N/d.
pub fn subset_inclusion_frequency(draws: usize) -> CheckReport {
    let (d, n) = (10, 3);
    let mut rng = stream_rng(42, STREAM_GENERAL);
    let mut hits = vec![0u64; d];
    for _ in 0..draws {
        let dirs = sample_directions(Method::Crc, d, n, &mut rng).expect("coordinate sample");
        for v in &dirs.vectors {
            let j = v.iter().position(|&c| c != 0.0).unwrap();
            hits[j] += 1;
        }
    }
    let expected = n as f64 / d as f64;
    let worst = hits
        .iter()
        .map(|&h| (h as f64 / draws as f64 - expected).abs())
        .fold(0.0, f64::max);
    let tol = 0.01 * (1e5 / draws as f64).sqrt();
    CheckReport::new(
        "crc-inclusion-frequency",
        worst <= tol,
        format!("{draws} draws, worst |freq - {expected}| = {worst:.4} (tolerance {tol:.3})"),
    )
}

/// Problem id plus the noise model when one is recorded, so the abs and rel
/// variants report under distinct names.
fn problem_tag(problem: &dyn StochasticProblem) -> String {
    let info = problem.info();
    match info.metadata.iter().find(|(k, _)| k == "noise") {
        Some((_, noise)) => format!("{}-{noise}", info.id),
        None => info.id.clone(),
    }
}

/// Monte-Carlo mean of the stochastic oracle at a perturbed start point must
/// match the analytic expectation within 4 standard errors.
pub fn oracle_unbiasedness(problem: &dyn StochasticProblem, draws: usize, seed: u64) -> CheckReport {
    let mut rng = stream_rng(seed, STREAM_GENERAL);
    let mut x = problem.x0();
    for xi in &mut x {
        *xi += 0.05 * rng.sample::<f64, _>(StandardNormal);
    }
    let truth = problem.f_exact(&x);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..draws {
        let z = problem.draw_zeta(&mut rng);
        let f = problem.eval(&x, &z);
        sum += f;
        sum_sq += f * f;
    }
    let n = draws as f64;
    let mean = sum / n;
    let var = (sum_sq - n * mean * mean).max(0.0) / (n - 1.0);
    let se = (var / n).sqrt();
    let dev = (mean - truth).abs();
    let passed = dev <= 4.0 * se;
    CheckReport::new(
        format!("oracle-unbiasedness/{}", problem_tag(problem)),
        passed,
        format!("{draws} draws, |mean - F| = {dev:.3e}, 4 SE = {:.3e}", 4.0 * se),
    )
}

/// The analytic gradient against plain central differences of F_exact at
/// randomly perturbed points.
pub fn gradient_consistency(problem: &dyn StochasticProblem, seed: u64) -> CheckReport {
    let d = problem.dim();
    let nu = 1e-6;
    let mut rng = stream_rng(seed, STREAM_GENERAL);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let mut x = problem.x0();
        for xi in &mut x {
            *xi += 0.1 * rng.sample::<f64, _>(StandardNormal);
        }
        let grad = problem.grad_exact(&x);
        let mut fd = vec![0.0; d];
        for j in 0..d {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += nu;
            xm[j] -= nu;
            fd[j] = (problem.f_exact(&xp) - problem.f_exact(&xm)) / (2.0 * nu);
        }
        let rel = dist_sq(&fd, &grad).sqrt() / norm(&grad).max(1e-8);
        worst = worst.max(rel);
    }
    CheckReport::new(
        format!("gradient-consistency/{}", problem_tag(problem)),
        worst <= 1e-5,
        format!("worst relative error over 10 points {worst:.3e} (tolerance 1e-5)"),
    )
}

/// Every stochastic problem constructible without external data: the four
/// least-squares families under both noise models, plus the quadratic.
pub fn standard_problems() -> Result<Vec<Box<dyn StochasticProblem>>> {
    let mut out: Vec<Box<dyn StochasticProblem>> = Vec::new();
    for name in NLLS_NAMES {
        for noise in [NoiseModel::Abs, NoiseModel::Rel] {
            out.push(make_nlls(name, noise, 1e-3)?);
        }
    }
    out.push(Box::new(make_stochastic_quadratic(10, 0.1)));
    Ok(out)
}

/// The full validator battery. `quick` shrinks the Monte-Carlo draw counts
/// (tolerances widen accordingly); exact checks are unaffected.
pub fn run_all(quick: bool) -> Result<Vec<CheckReport>> {
    let (dir_draws, oracle_draws) = if quick { (10_000, 20_000) } else { (100_000, 1_000_000) };
    let mut reports = vec![
        affine_exactness(),
        bias_bound_equality(),
        crn_cancellation(),
        subset_inclusion_frequency(dir_draws),
    ];
    for method in [Method::Cgs, Method::Css, Method::Crc, Method::Crs] {
        reports.push(direction_unbiasedness(method, dir_draws));
    }
    for (i, problem) in standard_problems()?.iter().enumerate() {
        reports.push(oracle_unbiasedness(problem.as_ref(), oracle_draws, 300 + i as u64));
        reports.push(gradient_consistency(problem.as_ref(), 600 + i as u64));
    }
    Ok(reports)
}
