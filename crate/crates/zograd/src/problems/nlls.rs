//! Noisy wrappers around deterministic residual families.
//!
//! Given residuals `phi: R^d -> R^p` and `zeta ~ N(0, sigma^2 I_p)`, the two
//! models are
//!
//! * absolute: `f(x, zeta) = sum_j (phi_j + zeta_j)^2 - sigma^2`, whose
//!   expectation is `sum_j phi_j^2 + (p-1) sigma^2`;
//! * relative: `f(x, zeta) = sum_j phi_j^2 (1 + zeta_j)^2 / (1 + sigma^2)`,
//!   whose expectation is exactly `sum_j phi_j^2`.
//!
//! The absolute model's constant offset `(p-1) sigma^2` is folded into both
//! `f_exact` and `f_star`, so optimality gaps are unaffected by it and the
//! exact gradient is the gradient of the sum of squares in both models.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::families::ResidualFamily;
use super::{NoiseModel, ProblemInfo, StochasticProblem, Zeta};
use crate::trace::fmt_float;

#[derive(Debug, Clone)]
pub struct NllsProblem<R: ResidualFamily> {
    family: R,
    noise: NoiseModel,
    sigma: f64,
    info: ProblemInfo,
}

impl<R: ResidualFamily> NllsProblem<R> {
    pub fn new(family: R, noise: NoiseModel, sigma: f64) -> Self {
        let info = ProblemInfo {
            id: family.id().to_string(),
            dim: family.dim(),
            num_residuals: Some(family.num_residuals()),
            num_data: None,
            grad_lipschitz: None,
            metadata: vec![
                ("noise".to_string(), noise.to_string()),
                ("sigma".to_string(), fmt_float(sigma)),
            ],
        };
        NllsProblem {
            family,
            noise,
            sigma,
            info,
        }
    }

    pub fn family(&self) -> &R {
        &self.family
    }

    /// Constant separating `E f` from the noiseless sum of squares.
    fn offset(&self) -> f64 {
        match self.noise {
            NoiseModel::Abs => {
                (self.family.num_residuals() as f64 - 1.0) * self.sigma * self.sigma
            }
            NoiseModel::Rel => 0.0,
        }
    }
}

impl<R: ResidualFamily> StochasticProblem for NllsProblem<R> {
    fn info(&self) -> &ProblemInfo {
        &self.info
    }

    fn eval(&self, x: &[f64], zeta: &Zeta) -> f64 {
        let Zeta::Noise(z) = zeta else {
            panic!("NLLS oracle needs a noise-vector realization");
        };
        assert_eq!(
            z.len(),
            self.family.num_residuals(),
            "realization length must match residual count"
        );
        let mut acc = 0.0;
        match self.noise {
            NoiseModel::Abs => {
                self.family.visit_residuals(x, |j, phi| {
                    let r = phi + z[j];
                    acc += r * r;
                });
                acc - self.sigma * self.sigma
            }
            NoiseModel::Rel => {
                self.family.visit_residuals(x, |j, phi| {
                    let r = phi * (1.0 + z[j]);
                    acc += r * r;
                });
                acc / (1.0 + self.sigma * self.sigma)
            }
        }
    }

    fn draw_zeta(&self, rng: &mut ChaCha8Rng) -> Zeta {
        let p = self.family.num_residuals();
        Zeta::Noise(
            (0..p)
                .map(|_| self.sigma * rng.sample::<f64, _>(StandardNormal))
                .collect(),
        )
    }

    fn f_exact(&self, x: &[f64]) -> f64 {
        self.family.sum_sq(x) + self.offset()
    }

    fn grad_exact(&self, x: &[f64]) -> Vec<f64> {
        self.family.grad_sum_sq(x)
    }

    fn f_star(&self) -> f64 {
        self.family.f_star() + self.offset()
    }

    fn x0(&self) -> Vec<f64> {
        self.family.x0()
    }
}

#[cfg(test)]
mod tests {
    use super::super::families::{Bdqrtic, Cube};
    use super::*;
    use crate::rng::{stream_rng, STREAM_REALIZATIONS};
    use approx::assert_relative_eq;

    #[test]
    fn zero_noise_reduces_to_sum_of_squares() {
        for noise in [NoiseModel::Abs, NoiseModel::Rel] {
            let p = NllsProblem::new(Cube, noise, 0.0);
            let x = p.x0();
            let zeta = Zeta::Noise(vec![0.0; 20]);
            assert_eq!(p.eval(&x, &zeta), p.f_exact(&x));
            assert_eq!(p.f_star(), 0.0);
        }
    }

    #[test]
    fn abs_model_hand_value() {
        // Cube at all-ones has every residual zero, so with noise z the
        // absolute oracle returns sum z_j^2 - sigma^2 exactly.
        let p = NllsProblem::new(Cube, NoiseModel::Abs, 0.5);
        let mut z = vec![0.0; 20];
        z[3] = 1.0;
        z[7] = -2.0;
        let v = p.eval(&vec![1.0; 20], &Zeta::Noise(z));
        assert_relative_eq!(v, 1.0 + 4.0 - 0.25);
    }

    #[test]
    fn rel_model_hand_value() {
        // One-residual view: scale every residual by (1 + z_j) with z = 1
        // everywhere, so the sum of squares quadruples before normalization.
        let p = NllsProblem::new(Cube, NoiseModel::Rel, 0.5);
        let x = p.x0();
        let base = Cube.sum_sq(&x);
        let v = p.eval(&x, &Zeta::Noise(vec![1.0; 20]));
        assert_relative_eq!(v, 4.0 * base / 1.25, max_relative = 1e-15);
    }

    #[test]
    fn abs_offset_shifts_fstar_and_fexact_together() {
        let sigma = 1e-3;
        let p = NllsProblem::new(Bdqrtic, NoiseModel::Abs, sigma);
        let clean = NllsProblem::new(Bdqrtic, NoiseModel::Rel, sigma);
        let x = p.x0();
        let shift = 91.0 * sigma * sigma;
        assert_relative_eq!(p.f_exact(&x), clean.f_exact(&x) + shift);
        assert_relative_eq!(p.f_star(), clean.f_star() + shift);
        // gaps agree
        assert_relative_eq!(
            p.gap_of(p.f_exact(&x)),
            clean.gap_of(clean.f_exact(&x)),
            epsilon = 1e-12
        );
    }

    #[test]
    fn oracle_is_unbiased_monte_carlo() {
        // 200k draws; the abs-model estimator of F has std ~ 2 sigma
        // sqrt(2 sum phi^2) / sqrt(M), comfortably inside the tolerance.
        let sigma = 1e-2;
        let reps = 200_000;
        for noise in [NoiseModel::Abs, NoiseModel::Rel] {
            let p = NllsProblem::new(Cube, noise, sigma);
            let x = p.x0();
            let mut rng = stream_rng(11, STREAM_REALIZATIONS);
            let mean: f64 = (0..reps)
                .map(|_| p.eval(&x, &p.draw_zeta(&mut rng)))
                .sum::<f64>()
                / reps as f64;
            let want = p.f_exact(&x);
            assert_relative_eq!(mean, want, max_relative = 1e-4);
        }
    }

    #[test]
    fn draw_zeta_matches_sigma() {
        let sigma = 2.0;
        let p = NllsProblem::new(Cube, NoiseModel::Abs, sigma);
        let mut rng = stream_rng(12, STREAM_REALIZATIONS);
        let mut sum_sq = 0.0;
        let reps = 20_000;
        for _ in 0..reps {
            let Zeta::Noise(z) = p.draw_zeta(&mut rng) else {
                unreachable!()
            };
            assert_eq!(z.len(), 20);
            sum_sq += z.iter().map(|v| v * v).sum::<f64>();
        }
        let var = sum_sq / (reps * 20) as f64;
        assert_relative_eq!(var, sigma * sigma, max_relative = 0.02);
    }
}
