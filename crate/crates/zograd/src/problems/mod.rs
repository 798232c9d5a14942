//! Stochastic test problems.
//!
//! A [`StochasticProblem`] exposes two faces: the *noisy oracle* `eval`,
//! which is the only thing the optimizer may query, and the *exact* quantities
//! (`f_exact`, `grad_exact`, `f_star`) used solely for reporting and tests.
//! Noise enters through an explicit realization value [`Zeta`] so that common
//! random numbers are possible: evaluating at `x + nu u` and `x - nu u` with
//! the same `Zeta` cancels additive noise in a central difference exactly.

mod families;
mod libsvm;
mod logreg;
mod nlls;
mod quadratic;
pub mod synthetic;

pub use families::{Bdqrtic, Chebyquad, Cube, Osborne2, ResidualFamily};
pub use libsvm::{parse_libsvm, LibsvmRecord};
pub use logreg::{make_logreg, LabelMap, LogRegOptions, LogRegProblem};
pub use nlls::NllsProblem;
pub use quadratic::{make_stochastic_quadratic, StochasticQuadratic};

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// One realization of the randomness in a stochastic oracle: either a vector
/// of noise values or the index of a data point.
#[derive(Debug, Clone, PartialEq)]
pub enum Zeta {
    Noise(Vec<f64>),
    Index(usize),
}

/// Which noise model wraps an NLLS residual family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum NoiseModel {
    /// Additive per-residual noise: `sum_j (phi_j + zeta_j)^2 - sigma^2`.
    Abs,
    /// Multiplicative per-residual noise: `sum_j phi_j^2 (1 + zeta_j)^2 / (1 + sigma^2)`.
    Rel,
}

impl NoiseModel {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseModel::Abs => "abs",
            NoiseModel::Rel => "rel",
        }
    }
}

impl std::fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Descriptive data attached to a problem instance.
#[derive(Debug, Clone)]
pub struct ProblemInfo {
    pub id: String,
    pub dim: usize,
    /// Residual count for NLLS problems.
    pub num_residuals: Option<usize>,
    /// Data-point count for finite-sum problems.
    pub num_data: Option<usize>,
    /// Gradient Lipschitz constant, when known analytically.
    pub grad_lipschitz: Option<f64>,
    /// Extra `key=value` pairs copied into trace headers.
    pub metadata: Vec<(String, String)>,
}

/// A noisy objective `f(x, zeta)` with `E_zeta f(x, zeta) = F(x)`.
pub trait StochasticProblem: Send + Sync {
    fn info(&self) -> &ProblemInfo;

    /// Noisy oracle value at `x` under realization `zeta`.
    fn eval(&self, x: &[f64], zeta: &Zeta) -> f64;

    /// Draws a fresh realization.
    fn draw_zeta(&self, rng: &mut ChaCha8Rng) -> Zeta;

    /// Exact expectation `F(x)`. Never available to the optimizer; used for
    /// trace reporting and tests.
    fn f_exact(&self, x: &[f64]) -> f64;

    /// Exact gradient of `F`.
    fn grad_exact(&self, x: &[f64]) -> Vec<f64>;

    /// Minimum of `F` reachable from `x0` (reference value for gaps).
    fn f_star(&self) -> f64;

    /// Standard starting point.
    fn x0(&self) -> Vec<f64>;

    fn dim(&self) -> usize {
        self.info().dim
    }

    /// Optimality gap of an exact objective value.
    fn gap_of(&self, f: f64) -> f64 {
        f - self.f_star()
    }
}

/// Names accepted by [`make_nlls`].
pub const NLLS_NAMES: [&str; 4] = ["bdqrtic", "cube", "chebyquad", "osborne2"];

/// Builds a registry NLLS problem under the given noise model.
pub fn make_nlls(
    name: &str,
    noise: NoiseModel,
    sigma: f64,
) -> Result<Box<dyn StochasticProblem>> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::invalid("sigma", "must be finite and >= 0"));
    }
    Ok(match name {
        "bdqrtic" => Box::new(NllsProblem::new(Bdqrtic, noise, sigma)),
        "cube" => Box::new(NllsProblem::new(Cube, noise, sigma)),
        "chebyquad" => Box::new(NllsProblem::new(Chebyquad, noise, sigma)),
        "osborne2" => Box::new(NllsProblem::new(Osborne2, noise, sigma)),
        _ => {
            return Err(Error::UnknownProblem {
                name: name.to_string(),
                known: NLLS_NAMES.join(", "),
            })
        }
    })
}

/// One row of the problem registry listing.
pub struct RegistryEntry {
    pub id: &'static str,
    pub dim: Option<usize>,
    pub num_residuals: Option<usize>,
    pub notes: &'static str,
}

/// Registry contents for `problems list`.
pub fn registry() -> Vec<RegistryEntry> {
    vec![
        RegistryEntry {
            id: "bdqrtic",
            dim: Some(50),
            num_residuals: Some(92),
            notes: "banded quartic chain",
        },
        RegistryEntry {
            id: "cube",
            dim: Some(20),
            num_residuals: Some(20),
            notes: "chained cube, F* = 0",
        },
        RegistryEntry {
            id: "chebyquad",
            dim: Some(30),
            num_residuals: Some(45),
            notes: "overdetermined Chebyshev quadrature fit",
        },
        RegistryEntry {
            id: "osborne2",
            dim: Some(11),
            num_residuals: Some(65),
            notes: "exponential data fit",
        },
        RegistryEntry {
            id: "quadratic",
            dim: None,
            num_residuals: None,
            notes: "separable quadratic with linear noise; --dim selects size",
        },
        RegistryEntry {
            id: "logreg",
            dim: None,
            num_residuals: None,
            notes: "l2-regularized logistic regression; requires --data",
        },
    ]
}
