//! Synthetic problems with analytically known estimator behavior.
//!
//! These exist for the estimator validators (`validate` subcommand and the
//! test suite), where the quantities under test — unbiasedness on affine
//! functions, exact CRN cancellation, the cubic bias identity — must be knowable
//! in closed form.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{ProblemInfo, StochasticProblem, Zeta};
use crate::linalg::dot;

/// `F(x) = a . x` with optional additive noise `c . zeta`.
///
/// The noise is independent of `x`, so under common random numbers it cancels
/// exactly in every central difference. Realizations are drawn *dyadic*
/// (components in {-2, -1, -0.5, 0.5, 1, 2}) so that, for dyadic `a`, `c`,
/// `x`, and `nu`, oracle arithmetic is exact in `f64` and the cancellation
/// can be asserted bitwise, not just approximately.
#[derive(Debug, Clone)]
pub struct Affine {
    a: Vec<f64>,
    c: Vec<f64>,
    info: ProblemInfo,
}

impl Affine {
    pub fn noiseless(a: Vec<f64>) -> Self {
        let c = vec![0.0; a.len()];
        Self::with_noise(a, c)
    }

    pub fn with_noise(a: Vec<f64>, c: Vec<f64>) -> Self {
        assert_eq!(a.len(), c.len());
        let info = ProblemInfo {
            id: "affine".to_string(),
            dim: a.len(),
            num_residuals: None,
            num_data: None,
            grad_lipschitz: Some(0.0),
            metadata: vec![],
        };
        Affine { a, c, info }
    }
}

/// Powers of two: drawing noise from these keeps central-difference
/// cancellation exact in floating point.
pub const DYADIC_VALUES: [f64; 6] = [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0];

impl StochasticProblem for Affine {
    fn info(&self) -> &ProblemInfo {
        &self.info
    }

    fn eval(&self, x: &[f64], zeta: &Zeta) -> f64 {
        let Zeta::Noise(z) = zeta else {
            panic!("affine oracle needs a noise-vector realization");
        };
        dot(&self.a, x) + dot(&self.c, z)
    }

    fn draw_zeta(&self, rng: &mut ChaCha8Rng) -> Zeta {
        Zeta::Noise(
            (0..self.a.len())
                .map(|_| DYADIC_VALUES[rng.random_range(0..DYADIC_VALUES.len())])
                .collect(),
        )
    }

    fn f_exact(&self, x: &[f64]) -> f64 {
        dot(&self.a, x)
    }

    fn grad_exact(&self, _x: &[f64]) -> Vec<f64> {
        self.a.clone()
    }

    fn f_star(&self) -> f64 {
        f64::NEG_INFINITY
    }

    fn x0(&self) -> Vec<f64> {
        vec![0.0; self.a.len()]
    }
}

/// `F(x) = sum_i x_i^3`, deterministic.
///
/// The third derivative is the constant 6, so the Hessian is 6-Lipschitz and
/// the central-difference bias is exactly `nu^2` per coordinate:
/// `g_cFD(x) - grad F(x) = nu^2 (1, ..., 1)`, giving `||bias|| = sqrt(d) nu^2`
/// — the cFD row of the bias-bound table with equality.
#[derive(Debug, Clone)]
pub struct CubicSum {
    info: ProblemInfo,
}

impl CubicSum {
    pub fn new(d: usize) -> Self {
        CubicSum {
            info: ProblemInfo {
                id: "cubic-sum".to_string(),
                dim: d,
                num_residuals: None,
                num_data: None,
                grad_lipschitz: None,
                metadata: vec![],
            },
        }
    }
}

impl StochasticProblem for CubicSum {
    fn info(&self) -> &ProblemInfo {
        &self.info
    }

    fn eval(&self, x: &[f64], _zeta: &Zeta) -> f64 {
        self.f_exact(x)
    }

    fn draw_zeta(&self, _rng: &mut ChaCha8Rng) -> Zeta {
        Zeta::Noise(vec![])
    }

    fn f_exact(&self, x: &[f64]) -> f64 {
        x.iter().map(|&v| v * v * v).sum()
    }

    fn grad_exact(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|&v| 3.0 * v * v).collect()
    }

    fn f_star(&self) -> f64 {
        f64::NEG_INFINITY
    }

    fn x0(&self) -> Vec<f64> {
        vec![0.0; self.info.dim]
    }
}

/// Wraps a problem and counts oracle calls, for independent verification of
/// evaluation budgets.
pub struct EvalCounter<P> {
    inner: P,
    count: AtomicU64,
}

impl<P: StochasticProblem> EvalCounter<P> {
    pub fn new(inner: P) -> Self {
        EvalCounter {
            inner,
            count: AtomicU64::new(0),
        }
    }

    pub fn count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    pub fn into_inner(self) -> P {
        self.inner
    }
}

impl<P: StochasticProblem> StochasticProblem for EvalCounter<P> {
    fn info(&self) -> &ProblemInfo {
        self.inner.info()
    }

    fn eval(&self, x: &[f64], zeta: &Zeta) -> f64 {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.eval(x, zeta)
    }

    fn draw_zeta(&self, rng: &mut ChaCha8Rng) -> Zeta {
        self.inner.draw_zeta(rng)
    }

    fn f_exact(&self, x: &[f64]) -> f64 {
        self.inner.f_exact(x)
    }

    fn grad_exact(&self, x: &[f64]) -> Vec<f64> {
        self.inner.grad_exact(x)
    }

    fn f_star(&self) -> f64 {
        self.inner.f_star()
    }

    fn x0(&self) -> Vec<f64> {
        self.inner.x0()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, STREAM_REALIZATIONS};

    #[test]
    fn affine_oracle_and_noise() {
        let p = Affine::with_noise(vec![1.0, 2.0], vec![0.5, 0.25]);
        let v = p.eval(&[1.0, 1.0], &Zeta::Noise(vec![2.0, -2.0]));
        assert_eq!(v, 3.0 + 1.0 - 0.5);
        let mut rng = stream_rng(1, STREAM_REALIZATIONS);
        for _ in 0..50 {
            let Zeta::Noise(z) = p.draw_zeta(&mut rng) else {
                unreachable!()
            };
            assert!(z.iter().all(|v| DYADIC_VALUES.contains(v)));
        }
    }

    #[test]
    fn counter_counts() {
        let p = EvalCounter::new(CubicSum::new(2));
        assert_eq!(p.count(), 0);
        let z = Zeta::Noise(vec![]);
        p.eval(&[1.0, 2.0], &z);
        p.eval(&[0.0, 0.0], &z);
        assert_eq!(p.count(), 2);
        assert_eq!(p.eval(&[1.0, 1.0], &z), 2.0);
    }
}
