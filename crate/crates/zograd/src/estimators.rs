//! Central-difference gradient estimation under common random numbers.
//!
//! For a direction set `T = {u_j}` with scaling `gamma` and a sample set
//! `S = {zeta_i}`, the per-realization estimate is
//!
//! `g_i = gamma * sum_j [(f(x + nu u_j, zeta_i) - f(x - nu u_j, zeta_i)) / (2 nu)] u_j`
//!
//! and the estimator is the average of the `g_i`. The same realization is
//! used at both stencil points (CRN), so noise that enters additively and
//! independently of `x` cancels in the difference.
//!
//! Evaluation order is fixed — for each realization, for each direction,
//! `+nu` before `-nu` — which makes [`extend_estimate`] produce bit-identical
//! results to a fresh estimate over the union sample set, and makes traces
//! reproducible. Each estimate costs exactly `2 |T| |S|` oracle calls, the
//! unit in which run budgets are accounted.

use crate::directions::{DirectionSet, Method};
use crate::error::{Error, Result};
use crate::linalg::axpy;
use crate::problems::{StochasticProblem, Zeta};

/// A gradient estimate with its per-realization components retained (the
/// norm test needs them for the sample variance).
#[derive(Debug, Clone)]
pub struct GradientEstimate {
    /// Average of `per_sample`.
    pub mean: Vec<f64>,
    /// One estimate per realization, in sample order.
    pub per_sample: Vec<Vec<f64>>,
    /// Oracle calls spent building this estimate.
    pub evals_used: u64,
    pub nu: f64,
    /// Point the estimate was taken at; extension is only legal at the same
    /// point.
    pub x: Vec<f64>,
    /// Cheap identity check for the direction set used (see
    /// [`DirectionSet::fingerprint`]-style hashing below).
    pub dirs_fingerprint: u64,
}

impl GradientEstimate {
    pub fn num_samples(&self) -> usize {
        self.per_sample.len()
    }
}

/// FNV-style fold over the exact bit patterns of the direction set. Collision
/// odds are negligible and a false mismatch is impossible, which is what a
/// contract check wants.
pub fn dirs_fingerprint(dirs: &DirectionSet) -> u64 {
    const PRIME: u64 = 0x0000_0100_0000_01B3;
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    let mut eat = |v: u64| {
        h ^= v;
        h = h.wrapping_mul(PRIME);
    };
    eat(dirs.dim as u64);
    eat(dirs.gamma.to_bits());
    for v in &dirs.vectors {
        for &c in v {
            eat(c.to_bits());
        }
    }
    h
}

/// Order-fixed mean: accumulate in sample order, then scale once.
fn mean_of(per_sample: &[Vec<f64>], d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d];
    for g in per_sample {
        axpy(1.0, g, &mut m);
    }
    let inv = 1.0 / per_sample.len() as f64;
    for mi in &mut m {
        *mi *= inv;
    }
    m
}

fn check_geometry(problem: &dyn StochasticProblem, x: &[f64], dirs: &DirectionSet) -> Result<()> {
    if dirs.dim != problem.dim() || x.len() != problem.dim() {
        return Err(Error::invalid(
            "dims",
            format!(
                "problem dim {}, x dim {}, direction dim {}",
                problem.dim(),
                x.len(),
                dirs.dim
            ),
        ));
    }
    Ok(())
}

/// One per-realization estimate; the only place oracle calls happen.
fn single_sample(
    problem: &dyn StochasticProblem,
    x: &[f64],
    dirs: &DirectionSet,
    nu: f64,
    zeta: &Zeta,
    zeta_index: usize,
    xp: &mut [f64],
    xm: &mut [f64],
) -> Result<Vec<f64>> {
    let mut g = vec![0.0; x.len()];
    for (j, u) in dirs.vectors.iter().enumerate() {
        xp.copy_from_slice(x);
        axpy(nu, u, xp);
        xm.copy_from_slice(x);
        axpy(-nu, u, xm);
        let fp = problem.eval(xp, zeta);
        if !fp.is_finite() {
            return Err(Error::NonFiniteEval {
                value: fp,
                zeta_index,
                dir_index: j,
                x: xp.to_vec(),
            });
        }
        let fm = problem.eval(xm, zeta);
        if !fm.is_finite() {
            return Err(Error::NonFiniteEval {
                value: fm,
                zeta_index,
                dir_index: j,
                x: xm.to_vec(),
            });
        }
        let coef = dirs.gamma * ((fp - fm) / (2.0 * nu));
        axpy(coef, u, &mut g);
    }
    Ok(g)
}

/// Builds a fresh estimate at `x` over the given realizations.
pub fn estimate_gradient(
    problem: &dyn StochasticProblem,
    x: &[f64],
    dirs: &DirectionSet,
    samples: &[Zeta],
    nu: f64,
) -> Result<GradientEstimate> {
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::invalid("nu", "must be finite and > 0"));
    }
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    check_geometry(problem, x, dirs)?;

    let d = x.len();
    let mut xp = vec![0.0; d];
    let mut xm = vec![0.0; d];
    let mut per_sample = Vec::with_capacity(samples.len());
    for (i, zeta) in samples.iter().enumerate() {
        per_sample.push(single_sample(problem, x, dirs, nu, zeta, i, &mut xp, &mut xm)?);
    }
    let mean = mean_of(&per_sample, d);
    Ok(GradientEstimate {
        mean,
        evals_used: 2 * dirs.num_dirs() as u64 * samples.len() as u64,
        per_sample,
        nu,
        x: x.to_vec(),
        dirs_fingerprint: dirs_fingerprint(dirs),
    })
}

/// Extends `prev` with additional realizations, reproducing exactly what a
/// fresh estimate over the union sample set would have computed.
///
/// The new realizations must be fresh draws (disjoint from those already
/// averaged in — not verifiable here, the caller owns it); `x`, `dirs`, and
/// `nu` must be those of `prev`.
pub fn extend_estimate(
    prev: GradientEstimate,
    problem: &dyn StochasticProblem,
    x: &[f64],
    dirs: &DirectionSet,
    new_samples: &[Zeta],
    nu: f64,
) -> Result<GradientEstimate> {
    if new_samples.is_empty() {
        return Ok(prev);
    }
    if x != prev.x.as_slice() {
        return Err(Error::ContractViolation(
            "extend_estimate called at a different point than the original estimate".into(),
        ));
    }
    if nu != prev.nu {
        return Err(Error::ContractViolation(format!(
            "extend_estimate nu {} != original {}",
            nu, prev.nu
        )));
    }
    if dirs_fingerprint(dirs) != prev.dirs_fingerprint {
        return Err(Error::ContractViolation(
            "extend_estimate called with a different direction set".into(),
        ));
    }
    check_geometry(problem, x, dirs)?;

    let d = x.len();
    let base = prev.per_sample.len();
    let mut per_sample = prev.per_sample;
    let mut xp = vec![0.0; d];
    let mut xm = vec![0.0; d];
    for (i, zeta) in new_samples.iter().enumerate() {
        per_sample.push(single_sample(
            problem,
            x,
            dirs,
            nu,
            zeta,
            base + i,
            &mut xp,
            &mut xm,
        )?);
    }
    let mean = mean_of(&per_sample, d);
    Ok(GradientEstimate {
        mean,
        evals_used: prev.evals_used + 2 * dirs.num_dirs() as u64 * new_samples.len() as u64,
        per_sample,
        nu,
        x: prev.x,
        dirs_fingerprint: prev.dirs_fingerprint,
    })
}

/// Upper bound on the estimator bias norm `||E g - grad F||` for a problem
/// whose Hessian is `m_f`-Lipschitz.
pub fn bias_bound(method: Method, d: usize, nu: f64, m_f: f64) -> f64 {
    assert!(nu >= 0.0 && m_f >= 0.0);
    let d = d as f64;
    match method {
        Method::Cfd | Method::Crc | Method::Crs => d.sqrt() * m_f * nu * nu / 6.0,
        Method::Cgs => d * m_f * nu * nu,
        Method::Css => m_f * nu * nu,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::directions::sample_directions;
    use crate::linalg::norm;
    use crate::problems::synthetic::{Affine, CubicSum};
    use crate::problems::{make_stochastic_quadratic, StochasticProblem};
    use crate::rng::{stream_rng, STREAM_DIRECTIONS, STREAM_REALIZATIONS};
    use approx::assert_relative_eq;

    fn cfd(d: usize) -> DirectionSet {
        let mut rng = stream_rng(0, STREAM_DIRECTIONS);
        sample_directions(Method::Cfd, d, d, &mut rng).unwrap()
    }

    #[test]
    fn cubic_hand_value() {
        // d = 1, f = x^3 at x = 1, nu = 0.1:
        // ((1.1)^3 - (0.9)^3) / 0.2 = 3.01 = 3 x^2 + nu^2.
        let p = CubicSum::new(1);
        let est = estimate_gradient(&p, &[1.0], &cfd(1), &[Zeta::Noise(vec![])], 0.1).unwrap();
        assert_relative_eq!(est.mean[0], 3.01, max_relative = 1e-13);
        assert_eq!(est.evals_used, 2);
    }

    #[test]
    fn affine_is_recovered_exactly_by_cfd() {
        let a = vec![1.5, -2.25, 0.75, 3.0, -0.5];
        let p = Affine::noiseless(a.clone());
        let est =
            estimate_gradient(&p, &vec![0.0; 5], &cfd(5), &[Zeta::Noise(vec![0.0; 5])], 1e-3)
                .unwrap();
        for (g, want) in est.mean.iter().zip(&a) {
            assert_relative_eq!(g, want, max_relative = 1e-13);
        }
    }

    #[test]
    fn quadratic_directional_differences_are_unbiased_per_direction() {
        // On a quadratic the central difference along u equals u . grad F
        // with no O(nu^2) term; cFD recovers grad F to machine precision
        // even at a generic point and large nu.
        let p = make_stochastic_quadratic(6, 0.0);
        let x: Vec<f64> = (0..6).map(|i| (i as f64) - 2.5).collect();
        let zeta = Zeta::Noise(vec![0.0; 6]);
        let est = estimate_gradient(&p, &x, &cfd(6), &[zeta], 0.5).unwrap();
        let grad = p.grad_exact(&x);
        for (g, want) in est.mean.iter().zip(&grad) {
            assert_relative_eq!(g, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn bias_identity_for_cubic_sums() {
        // grad F_j = 3 x_j^2; the cFD estimate is 3 x_j^2 + nu^2 per
        // coordinate, so the bias norm is exactly sqrt(d) nu^2, which is
        // bias_bound with M = 6.
        for d in [1usize, 5, 20] {
            for nu in [0.1, 0.01] {
                let p = CubicSum::new(d);
                let x = vec![0.0; d];
                let est =
                    estimate_gradient(&p, &x, &cfd(d), &[Zeta::Noise(vec![])], nu).unwrap();
                let grad = p.grad_exact(&x);
                let diff: Vec<f64> = est
                    .mean
                    .iter()
                    .zip(&grad)
                    .map(|(g, want)| g - want)
                    .collect();
                let bound = bias_bound(Method::Cfd, d, nu, 6.0);
                assert_relative_eq!(norm(&diff), bound, max_relative = 1e-10);
                assert_relative_eq!(
                    bound,
                    (d as f64).sqrt() * nu * nu,
                    max_relative = 1e-14
                );
            }
        }
    }

    #[test]
    fn bias_bound_table_values() {
        assert_relative_eq!(bias_bound(Method::Cfd, 1, 0.1, 6.0), 0.01);
        assert_relative_eq!(bias_bound(Method::Cgs, 4, 0.5, 2.0), 2.0);
        assert_eq!(bias_bound(Method::Css, 17, 0.0, 3.0), 0.0);
        // cRC and cRS share the cFD bound
        for m in [Method::Crc, Method::Crs] {
            assert_relative_eq!(
                bias_bound(m, 9, 0.2, 1.5),
                3.0 * 1.5 * 0.04 / 6.0
            );
        }
    }

    #[test]
    fn crn_cancels_additive_noise_bitwise() {
        // All quantities dyadic with small exponent spread, so every f64
        // operation in the oracle and the stencil is exact: the noise term
        // c . zeta must then cancel *bitwise* between +nu and -nu.
        let d = 4;
        let a = vec![3.0, -1.5, 0.25, 8.0];
        let c = vec![1.0, 0.5, 0.25, 2.0];
        let p = Affine::with_noise(a, c);
        let x = vec![2.0, -4.0, 1.0, 0.5];
        let dirs = cfd(d);
        let noiseless =
            estimate_gradient(&p, &x, &dirs, &[Zeta::Noise(vec![0.0; d])], 0.25).unwrap();
        let mut rng = stream_rng(9, STREAM_REALIZATIONS);
        let zetas: Vec<Zeta> = (0..5).map(|_| p.draw_zeta(&mut rng)).collect();
        let est = estimate_gradient(&p, &x, &dirs, &zetas, 0.25).unwrap();
        for g in &est.per_sample {
            for (gi, ni) in g.iter().zip(&noiseless.mean) {
                assert_eq!(gi.to_bits(), ni.to_bits());
            }
        }
    }

    #[test]
    fn extension_matches_fresh_estimate_bitwise() {
        let p = make_stochastic_quadratic(5, 0.3);
        let x = p.x0();
        let mut drng = stream_rng(3, STREAM_DIRECTIONS);
        let dirs = sample_directions(Method::Cgs, 5, 3, &mut drng).unwrap();
        let mut rng = stream_rng(4, STREAM_REALIZATIONS);
        let zetas: Vec<Zeta> = (0..5).map(|_| p.draw_zeta(&mut rng)).collect();

        let fresh = estimate_gradient(&p, &x, &dirs, &zetas, 1e-2).unwrap();
        let first = estimate_gradient(&p, &x, &dirs, &zetas[..2], 1e-2).unwrap();
        let extended = extend_estimate(first, &p, &x, &dirs, &zetas[2..], 1e-2).unwrap();

        assert_eq!(extended.evals_used, fresh.evals_used);
        assert_eq!(extended.evals_used, 2 * 3 * 5);
        for (a, b) in extended.mean.iter().zip(&fresh.mean) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        for (ga, gb) in extended.per_sample.iter().zip(&fresh.per_sample) {
            for (a, b) in ga.iter().zip(gb) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn extension_accounting_and_noop() {
        let p = make_stochastic_quadratic(5, 0.1);
        let x = p.x0();
        let dirs = cfd(5);
        let mut rng = stream_rng(5, STREAM_REALIZATIONS);
        let zetas: Vec<Zeta> = (0..5).map(|_| p.draw_zeta(&mut rng)).collect();
        let est = estimate_gradient(&p, &x, &dirs, &zetas[..2], 0.1).unwrap();
        assert_eq!(est.evals_used, 2 * 5 * 2);

        let same = extend_estimate(est.clone(), &p, &x, &dirs, &[], 0.1).unwrap();
        assert_eq!(same.evals_used, est.evals_used);
        assert_eq!(same.per_sample.len(), 2);

        // |S| = 2 extended by 3 with |T| = 5 costs 2 * 5 * 3 = 30 more calls
        let grown = extend_estimate(est, &p, &x, &dirs, &zetas[2..], 0.1).unwrap();
        assert_eq!(grown.evals_used, 20 + 30);
        assert_eq!(grown.num_samples(), 5);
    }

    #[test]
    fn extension_contract_violations_are_caught() {
        let p = make_stochastic_quadratic(3, 0.1);
        let x = p.x0();
        let dirs = cfd(3);
        let mut rng = stream_rng(6, STREAM_REALIZATIONS);
        let zetas: Vec<Zeta> = (0..3).map(|_| p.draw_zeta(&mut rng)).collect();
        let est = estimate_gradient(&p, &x, &dirs, &zetas[..2], 0.1).unwrap();

        let other_x = vec![9.0, 9.0, 9.0];
        assert!(matches!(
            extend_estimate(est.clone(), &p, &other_x, &dirs, &zetas[2..], 0.1),
            Err(Error::ContractViolation(_))
        ));
        assert!(matches!(
            extend_estimate(est.clone(), &p, &x, &dirs, &zetas[2..], 0.2),
            Err(Error::ContractViolation(_))
        ));
        let mut other_dirs = dirs.clone();
        other_dirs.vectors[0][0] = 0.5;
        assert!(matches!(
            extend_estimate(est, &p, &x, &other_dirs, &zetas[2..], 0.1),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn non_finite_oracle_values_identify_the_call() {
        struct Exploding;
        impl StochasticProblem for Exploding {
            fn info(&self) -> &crate::problems::ProblemInfo {
                unimplemented!("not needed")
            }
            fn eval(&self, x: &[f64], _z: &Zeta) -> f64 {
                if x[1] > 1.05 {
                    f64::INFINITY
                } else {
                    x.iter().sum()
                }
            }
            fn draw_zeta(&self, _rng: &mut rand_chacha::ChaCha8Rng) -> Zeta {
                Zeta::Noise(vec![])
            }
            fn f_exact(&self, x: &[f64]) -> f64 {
                x.iter().sum()
            }
            fn grad_exact(&self, x: &[f64]) -> Vec<f64> {
                vec![1.0; x.len()]
            }
            fn f_star(&self) -> f64 {
                f64::NEG_INFINITY
            }
            fn x0(&self) -> Vec<f64> {
                vec![1.0, 1.0, 1.0]
            }
            fn dim(&self) -> usize {
                3
            }
        }
        let p = Exploding;
        let zetas = vec![Zeta::Noise(vec![]), Zeta::Noise(vec![])];
        // bumping coordinate 1 by +0.1 overflows, so the failure happens at
        // realization 0, direction 1, on the +nu side
        match estimate_gradient(&p, &[1.0; 3], &cfd(3), &zetas, 0.1) {
            Err(Error::NonFiniteEval {
                value,
                zeta_index,
                dir_index,
                x,
            }) => {
                assert!(value.is_infinite());
                assert_eq!(zeta_index, 0);
                assert_eq!(dir_index, 1);
                assert_relative_eq!(x[1], 1.1);
            }
            other => panic!("expected NonFiniteEval, got {other:?}"),
        }
    }

    #[test]
    fn empty_sample_set_is_rejected() {
        let p = make_stochastic_quadratic(2, 0.0);
        assert!(matches!(
            estimate_gradient(&p, &[0.0, 0.0], &cfd(2), &[], 0.1),
            Err(Error::InsufficientSamples { needed: 1, got: 0 })
        ));
    }

    #[test]
    fn mean_is_average_of_per_sample() {
        let p = make_stochastic_quadratic(4, 0.7);
        let x = p.x0();
        let mut drng = stream_rng(7, STREAM_DIRECTIONS);
        let dirs = sample_directions(Method::Css, 4, 6, &mut drng).unwrap();
        let mut rng = stream_rng(8, STREAM_REALIZATIONS);
        let zetas: Vec<Zeta> = (0..9).map(|_| p.draw_zeta(&mut rng)).collect();
        let est = estimate_gradient(&p, &x, &dirs, &zetas, 1e-2).unwrap();
        for k in 0..4 {
            let avg: f64 =
                est.per_sample.iter().map(|g| g[k]).sum::<f64>() / est.per_sample.len() as f64;
            assert_relative_eq!(est.mean[k], avg, max_relative = 1e-12);
        }
    }
}
