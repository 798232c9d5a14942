//! Direction sampling for central-difference gradient estimators.
//!
//! Five schemes are supported. Each produces a set of direction vectors
//! together with the scaling factor `gamma` that makes the estimator an
//! unbiased estimate of the gradient for linear functions:
//!
//! | scheme | directions                                        | gamma |
//! |--------|---------------------------------------------------|-------|
//! | `cfd`  | all `d` canonical basis vectors                   | 1     |
//! | `cgs`  | `N` i.i.d. standard Gaussian vectors              | 1/N   |
//! | `css`  | `N` i.i.d. uniform unit-sphere vectors            | d/N   |
//! | `crc`  | `N` canonical vectors, distinct, without repl.    | d/N   |
//! | `crs`  | first `N` columns of a random orthonormal basis   | d/N   |
//!
//! `crs` orthonormalizes Gaussian columns by modified Gram-Schmidt; since
//! column `j` of the result depends only on Gaussian columns `1..=j`, drawing
//! `N` columns is identical in distribution to orthonormalizing a full `d x d`
//! Gaussian matrix and keeping the first `N` columns.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm};

/// Direction scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Method {
    /// Central finite differences over every coordinate.
    Cfd,
    /// Central differences along Gaussian smoothing directions.
    Cgs,
    /// Central differences along unit-sphere directions.
    Css,
    /// Random subset of coordinate directions.
    Crc,
    /// Random orthonormal subspace directions.
    Crs,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Cfd,
        Method::Cgs,
        Method::Css,
        Method::Crc,
        Method::Crs,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Cfd => "cfd",
            Method::Cgs => "cgs",
            Method::Css => "css",
            Method::Crc => "crc",
            Method::Crs => "crs",
        }
    }

    /// Number of directions actually used per iteration when the caller asks
    /// for `n`: `cfd` always probes all `d` coordinates.
    pub fn effective_num_dirs(self, d: usize, n: usize) -> usize {
        match self {
            Method::Cfd => d,
            _ => n,
        }
    }

    /// Whether direction sampling consumes randomness.
    pub fn is_randomized(self) -> bool {
        !matches!(self, Method::Cfd)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid("method", format!("unknown method `{s}`")))
    }
}

/// A sampled set of directions plus its estimator scaling.
#[derive(Debug, Clone)]
pub struct DirectionSet {
    pub method: Method,
    pub dim: usize,
    pub vectors: Vec<Vec<f64>>,
    pub gamma: f64,
}

impl DirectionSet {
    pub fn num_dirs(&self) -> usize {
        self.vectors.len()
    }
}

/// Norm threshold below which a Gaussian draw is rejected and retried. This
/// fires with probability on the order of 1e-300^d; it exists so the sphere
/// normalization and Gram-Schmidt division are provably safe.
const DEGENERATE_NORM: f64 = 1e-300;

fn canonical(d: usize, j: usize) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[j] = 1.0;
    e
}

fn gaussian_vector(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Draws a direction set for one iteration.
///
/// `n` is the requested number of directions; `cfd` ignores it and always
/// returns all `d` coordinates. `crc` and `crs` require `n <= d`.
pub fn sample_directions(
    method: Method,
    d: usize,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<DirectionSet> {
    if d == 0 {
        return Err(Error::invalid("d", "dimension must be positive"));
    }
    if method.is_randomized() && n == 0 {
        return Err(Error::invalid("num_dirs", "must be positive"));
    }
    if matches!(method, Method::Crc | Method::Crs) && n > d {
        return Err(Error::invalid(
            "num_dirs",
            format!("{} requires num_dirs <= d, got {n} > {d}", method.as_str()),
        ));
    }

    let (vectors, gamma) = match method {
        Method::Cfd => ((0..d).map(|j| canonical(d, j)).collect(), 1.0),
        Method::Cgs => (
            (0..n).map(|_| gaussian_vector(d, rng)).collect(),
            1.0 / n as f64,
        ),
        Method::Css => {
            let mut vs = Vec::with_capacity(n);
            while vs.len() < n {
                let mut v = gaussian_vector(d, rng);
                let nrm = norm(&v);
                if nrm < DEGENERATE_NORM {
                    continue;
                }
                for vi in &mut v {
                    *vi /= nrm;
                }
                vs.push(v);
            }
            (vs, d as f64 / n as f64)
        }
        Method::Crc => {
            let idx = rand::seq::index::sample(rng, d, n);
            (
                idx.iter().map(|j| canonical(d, j)).collect(),
                d as f64 / n as f64,
            )
        }
        Method::Crs => {
            // Modified Gram-Schmidt, one Gaussian column at a time. A column
            // that collapses under projection (never in practice) is redrawn.
            let mut vs: Vec<Vec<f64>> = Vec::with_capacity(n);
            while vs.len() < n {
                let mut v = gaussian_vector(d, rng);
                for q in &vs {
                    let c = dot(q, &v);
                    axpy(-c, q, &mut v);
                }
                let nrm = norm(&v);
                if nrm < DEGENERATE_NORM {
                    continue;
                }
                for vi in &mut v {
                    *vi /= nrm;
                }
                vs.push(v);
            }
            (vs, d as f64 / n as f64)
        }
    };

    Ok(DirectionSet {
        method,
        dim: d,
        vectors,
        gamma,
    })
}
