//! Separable quadratic with additive linear noise.
//!
//! `f(x, zeta) = ||x||^2 / 2 + zeta . x` with `zeta ~ N(0, sigma^2 I_d)`, so
//! `F(x) = ||x||^2 / 2`, `grad F = x`, `F* = 0`. Gradient Lipschitz constant
//! is 1 and the Hessian is constant, which makes this the problem of choice
//! for validating estimator variance and bias claims: central differences are
//! exact on quadratics.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{ProblemInfo, StochasticProblem, Zeta};
use crate::linalg::{dot, norm_sq};
use crate::trace::fmt_float;

#[derive(Debug, Clone)]
pub struct StochasticQuadratic {
    sigma: f64,
    info: ProblemInfo,
}

/// Builds the quadratic in dimension `d` with noise scale `sigma`.
pub fn make_stochastic_quadratic(d: usize, sigma: f64) -> StochasticQuadratic {
    assert!(d > 0, "dimension must be positive");
    assert!(sigma.is_finite() && sigma >= 0.0);
    StochasticQuadratic {
        sigma,
        info: ProblemInfo {
            id: "quadratic".to_string(),
            dim: d,
            num_residuals: None,
            num_data: None,
            grad_lipschitz: Some(1.0),
            metadata: vec![("sigma".to_string(), fmt_float(sigma))],
        },
    }
}

impl StochasticProblem for StochasticQuadratic {
    fn info(&self) -> &ProblemInfo {
        &self.info
    }

    fn eval(&self, x: &[f64], zeta: &Zeta) -> f64 {
        let Zeta::Noise(z) = zeta else {
            panic!("quadratic oracle needs a noise-vector realization");
        };
        assert_eq!(z.len(), x.len());
        0.5 * norm_sq(x) + dot(z, x)
    }

    fn draw_zeta(&self, rng: &mut ChaCha8Rng) -> Zeta {
        Zeta::Noise(
            (0..self.info.dim)
                .map(|_| self.sigma * rng.sample::<f64, _>(StandardNormal))
                .collect(),
        )
    }

    fn f_exact(&self, x: &[f64]) -> f64 {
        0.5 * norm_sq(x)
    }

    fn grad_exact(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    fn f_star(&self) -> f64 {
        0.0
    }

    fn x0(&self) -> Vec<f64> {
        vec![1.0; self.info.dim]
    }
}
