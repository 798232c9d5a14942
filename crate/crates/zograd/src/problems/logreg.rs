//! l2-regularized logistic regression over a LIBSVM dataset.
//!
//! The population objective is the full-data average
//!
//! `F(x) = (1/N) sum_i log(1 + exp(-z_i x.y_i)) + (lambda/2) ||x||^2`
//!
//! and one realization is a uniformly drawn data index (with replacement):
//! `f(x, i) = log(1 + exp(-z_i x.y_i)) + (lambda/2) ||x||^2`. The regularizer
//! appears in every realization, so the oracle is unbiased by construction.
//!
//! The reference value `F*` is computed once at load time by minimizing the
//! (lambda-strongly-convex) objective with Nesterov's accelerated gradient
//! method to `||grad F|| <= 1e-10`; at that point the value error is at most
//! `||grad||^2 / (2 lambda)`, far below anything a run can resolve.

use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::libsvm::{max_feature_index, parse_libsvm};
use super::{ProblemInfo, StochasticProblem, Zeta};
use crate::error::{Error, Result};
use crate::linalg::{norm, norm_sq};
use crate::trace::fmt_float;

/// How raw dataset labels are turned into +/-1 classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum LabelMap {
    /// `{-1, +1}` kept; any other two-label set maps smaller to -1, larger
    /// to +1 (covers `{0, 1}` and `{1, 2}`). More than two labels is an
    /// error.
    #[default]
    Auto,
    /// Integer labels by parity: even -> +1, odd -> -1 (digit datasets).
    Parity,
}

impl LabelMap {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelMap::Auto => "auto",
            LabelMap::Parity => "parity",
        }
    }
}

#[derive(Debug, Clone)]
pub struct LogRegOptions {
    pub label_map: LabelMap,
    /// All feature values are divided by this (e.g. 255 for raw pixel data).
    pub feature_scale: f64,
    /// Regularization weight; defaults to `1/N`.
    pub lambda: Option<f64>,
    /// Skip the reference solve and use this `F*` instead.
    pub f_star_override: Option<f64>,
}

impl Default for LogRegOptions {
    fn default() -> Self {
        LogRegOptions {
            label_map: LabelMap::Auto,
            feature_scale: 1.0,
            lambda: None,
            f_star_override: None,
        }
    }
}

pub struct LogRegProblem {
    /// Sparse rows with 0-based indices, already scaled.
    rows: Vec<Vec<(usize, f64)>>,
    /// Labels in {-1, +1}.
    labels: Vec<f64>,
    lambda: f64,
    f_star: f64,
    info: ProblemInfo,
}

/// `log(1 + e^u)` without overflow.
fn softplus(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

/// `d/dt log(1 + e^{-t}) = -1 / (1 + e^t)`, computed stably.
fn loss_deriv(t: f64) -> f64 {
    if t >= 0.0 {
        let e = (-t).exp();
        -e / (1.0 + e)
    } else {
        -1.0 / (1.0 + t.exp())
    }
}

fn sparse_dot(row: &[(usize, f64)], x: &[f64]) -> f64 {
    row.iter().map(|&(j, v)| v * x[j]).sum()
}

fn map_labels(raw: &[f64], map: LabelMap) -> Result<Vec<f64>> {
    match map {
        LabelMap::Auto => {
            let mut distinct: Vec<f64> = Vec::new();
            for &l in raw {
                if !distinct.iter().any(|&d| d == l) {
                    distinct.push(l);
                }
                if distinct.len() > 2 {
                    return Err(Error::invalid(
                        "labels",
                        "more than two distinct labels; use the parity mapping",
                    ));
                }
            }
            if distinct.iter().all(|&l| l == -1.0 || l == 1.0) {
                return Ok(raw.to_vec());
            }
            if distinct.len() < 2 {
                return Err(Error::invalid("labels", "need two distinct labels"));
            }
            let lo = distinct[0].min(distinct[1]);
            Ok(raw
                .iter()
                .map(|&l| if l == lo { -1.0 } else { 1.0 })
                .collect())
        }
        LabelMap::Parity => raw
            .iter()
            .map(|&l| {
                if l.fract() != 0.0 || !l.is_finite() {
                    Err(Error::invalid(
                        "labels",
                        format!("parity mapping needs integer labels, got {l}"),
                    ))
                } else if (l as i64).rem_euclid(2) == 0 {
                    Ok(1.0)
                } else {
                    Ok(-1.0)
                }
            })
            .collect(),
    }
}

/// Loads a LIBSVM file and builds the logistic-regression problem.
pub fn make_logreg(path: impl AsRef<Path>, options: LogRegOptions) -> Result<LogRegProblem> {
    let path = path.as_ref();
    if !(options.feature_scale.is_finite() && options.feature_scale > 0.0) {
        return Err(Error::invalid("feature_scale", "must be finite and > 0"));
    }
    let records = parse_libsvm(path)?;
    let dim = max_feature_index(&records);
    if dim == 0 {
        return Err(Error::invalid("data", "dataset has no features"));
    }
    let n = records.len();
    let raw_labels: Vec<f64> = records.iter().map(|r| r.label).collect();
    let labels = map_labels(&raw_labels, options.label_map)?;
    let rows: Vec<Vec<(usize, f64)>> = records
        .into_iter()
        .map(|r| {
            r.features
                .into_iter()
                .map(|(i, v)| (i - 1, v / options.feature_scale))
                .collect()
        })
        .collect();

    let lambda = options.lambda.unwrap_or(1.0 / n as f64);
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid("lambda", "must be finite and > 0"));
    }
    let max_row_sq = rows
        .iter()
        .map(|r| r.iter().map(|&(_, v)| v * v).sum::<f64>())
        .fold(0.0, f64::max);
    let grad_lipschitz = 0.25 * max_row_sq + lambda;

    let mut problem = LogRegProblem {
        rows,
        labels,
        lambda,
        f_star: f64::NAN,
        info: ProblemInfo {
            id: "logreg".to_string(),
            dim,
            num_residuals: None,
            num_data: Some(n),
            grad_lipschitz: Some(grad_lipschitz),
            metadata: vec![
                ("data".to_string(), path.display().to_string()),
                ("n_data".to_string(), n.to_string()),
                ("lambda".to_string(), fmt_float(lambda)),
                ("label_map".to_string(), options.label_map.as_str().to_string()),
                ("feature_scale".to_string(), fmt_float(options.feature_scale)),
            ],
        },
    };
    problem.f_star = match options.f_star_override {
        Some(v) => v,
        None => problem.solve_reference(grad_lipschitz)?,
    };
    Ok(problem)
}

impl LogRegProblem {
    pub fn num_data(&self) -> usize {
        self.labels.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn value_and_grad(&self, x: &[f64], g: &mut [f64]) -> f64 {
        g.fill(0.0);
        let mut loss = 0.0;
        for (row, &z) in self.rows.iter().zip(&self.labels) {
            let t = z * sparse_dot(row, x);
            loss += softplus(-t);
            let w = loss_deriv(t) * z;
            for &(j, v) in row {
                g[j] += w * v;
            }
        }
        let inv_n = 1.0 / self.labels.len() as f64;
        for (gj, xj) in g.iter_mut().zip(x) {
            *gj = *gj * inv_n + self.lambda * xj;
        }
        loss * inv_n + 0.5 * self.lambda * norm_sq(x)
    }

    /// Accelerated gradient descent for the strongly convex objective.
    fn solve_reference(&self, l: f64) -> Result<f64> {
        const GTOL: f64 = 1e-10;
        const MAX_ITERS: usize = 500_000;
        let d = self.info.dim;
        let kappa = l / self.lambda;
        let beta = (kappa.sqrt() - 1.0) / (kappa.sqrt() + 1.0);
        let mut x = vec![0.0; d];
        let mut y = vec![0.0; d];
        let mut g = vec![0.0; d];
        for _ in 0..MAX_ITERS {
            let fy = self.value_and_grad(&y, &mut g);
            if norm(&g) <= GTOL {
                return Ok(fy);
            }
            let mut x_new = y.clone();
            for (xi, gi) in x_new.iter_mut().zip(&g) {
                *xi -= gi / l;
            }
            for ((yi, &xni), &xi) in y.iter_mut().zip(&x_new).zip(&x) {
                *yi = xni + beta * (xni - xi);
            }
            x = x_new;
        }
        Err(Error::ContractViolation(
            "reference solve did not reach the gradient tolerance; \
             pass an explicit reference value"
                .to_string(),
        ))
    }
}

impl StochasticProblem for LogRegProblem {
    fn info(&self) -> &ProblemInfo {
        &self.info
    }

    fn eval(&self, x: &[f64], zeta: &Zeta) -> f64 {
        let Zeta::Index(i) = zeta else {
            panic!("logreg oracle needs a data-index realization");
        };
        let t = self.labels[*i] * sparse_dot(&self.rows[*i], x);
        softplus(-t) + 0.5 * self.lambda * norm_sq(x)
    }

    fn draw_zeta(&self, rng: &mut ChaCha8Rng) -> Zeta {
        Zeta::Index(rng.random_range(0..self.labels.len()))
    }

    fn f_exact(&self, x: &[f64]) -> f64 {
        let loss: f64 = self
            .rows
            .iter()
            .zip(&self.labels)
            .map(|(row, &z)| softplus(-z * sparse_dot(row, x)))
            .sum();
        loss / self.labels.len() as f64 + 0.5 * self.lambda * norm_sq(x)
    }

    fn grad_exact(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.info.dim];
        self.value_and_grad(x, &mut g);
        g
    }

    fn f_star(&self) -> f64 {
        self.f_star
    }

    fn x0(&self) -> Vec<f64> {
        vec![0.0; self.info.dim]
    }
}
