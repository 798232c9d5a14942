//! Deterministic nonlinear least-squares residual families.
//!
//! Each family defines a smooth map `phi: R^d -> R^p`; the benchmark
//! objective is `F(x) = sum_j phi_j(x)^2` with noise injected per residual by
//! the wrappers in [`super::nlls`]. Dimensions are fixed to the registry
//! configuration. Reference minima were obtained offline with a trust-region
//! least-squares solver plus a quasi-Newton polish, converged to
//! `||grad F|| <= 1e-7` and cross-checked between the two solvers to ~1e-14
//! relative agreement.

/// A residual map with analytic gradient of its sum of squares.
///
/// `visit_residuals` streams `(j, phi_j(x))` pairs in index order; it is
/// generic (not object-safe) so the closure inlines into the family's inner
/// loop. Implementations must visit every `j` in `0..num_residuals()` exactly
/// once, in order.
pub trait ResidualFamily: Send + Sync {
    fn id(&self) -> &'static str;
    fn dim(&self) -> usize;
    fn num_residuals(&self) -> usize;
    fn visit_residuals(&self, x: &[f64], visit: impl FnMut(usize, f64));
    /// Gradient of `sum_j phi_j(x)^2`, i.e. `2 J(x)^T phi(x)`.
    fn grad_sum_sq(&self, x: &[f64]) -> Vec<f64>;
    fn x0(&self) -> Vec<f64>;
    /// Minimum of the noiseless sum of squares from `x0`.
    fn f_star(&self) -> f64;

    fn sum_sq(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        self.visit_residuals(x, |_, phi| acc += phi * phi);
        acc
    }
}

// ---------------------------------------------------------------------------
// BDQRTIC, d = 50, p = 2(d-4) = 92.
//
// Residuals come in two blocks: the linear parts -4 x_i + 3 for
// i = 0..d-4, followed by the quartic parts
// x_i^2 + 2 x_{i+1}^2 + 3 x_{i+2}^2 + 4 x_{i+3}^2 + 5 x_{d-1}^2.
// Start: all ones.
// ---------------------------------------------------------------------------

const BDQRTIC_DIM: usize = 50;
const BDQRTIC_F_STAR: f64 = 1.78488705210470300e2;

#[derive(Debug, Clone, Copy, Default)]
pub struct Bdqrtic;

impl Bdqrtic {
    fn quartic(&self, x: &[f64], i: usize) -> f64 {
        x[i] * x[i]
            + 2.0 * x[i + 1] * x[i + 1]
            + 3.0 * x[i + 2] * x[i + 2]
            + 4.0 * x[i + 3] * x[i + 3]
            + 5.0 * x[BDQRTIC_DIM - 1] * x[BDQRTIC_DIM - 1]
    }
}

impl ResidualFamily for Bdqrtic {
    fn id(&self) -> &'static str {
        "bdqrtic"
    }

    fn dim(&self) -> usize {
        BDQRTIC_DIM
    }

    fn num_residuals(&self) -> usize {
        2 * (BDQRTIC_DIM - 4)
    }

    fn visit_residuals(&self, x: &[f64], mut visit: impl FnMut(usize, f64)) {
        let m = BDQRTIC_DIM - 4;
        for i in 0..m {
            visit(i, -4.0 * x[i] + 3.0);
        }
        for i in 0..m {
            visit(m + i, self.quartic(x, i));
        }
    }

    fn grad_sum_sq(&self, x: &[f64]) -> Vec<f64> {
        let d = BDQRTIC_DIM;
        let mut g = vec![0.0; d];
        for i in 0..d - 4 {
            let lin = -4.0 * x[i] + 3.0;
            g[i] += 2.0 * lin * -4.0;
            let q = self.quartic(x, i);
            g[i] += 2.0 * q * 2.0 * x[i];
            g[i + 1] += 2.0 * q * 4.0 * x[i + 1];
            g[i + 2] += 2.0 * q * 6.0 * x[i + 2];
            g[i + 3] += 2.0 * q * 8.0 * x[i + 3];
            g[d - 1] += 2.0 * q * 10.0 * x[d - 1];
        }
        g
    }

    fn x0(&self) -> Vec<f64> {
        vec![1.0; BDQRTIC_DIM]
    }

    fn f_star(&self) -> f64 {
        BDQRTIC_F_STAR
    }
}

// ---------------------------------------------------------------------------
// Chained cube, d = p = 20.
//
// phi_0 = x_0 - 1, phi_i = 10 (x_i - x_{i-1}^3). The minimum is exactly zero
// at the all-ones point. Start alternates -1.2 / 1.0.
// ---------------------------------------------------------------------------

const CUBE_DIM: usize = 20;

#[derive(Debug, Clone, Copy, Default)]
pub struct Cube;

impl ResidualFamily for Cube {
    fn id(&self) -> &'static str {
        "cube"
    }

    fn dim(&self) -> usize {
        CUBE_DIM
    }

    fn num_residuals(&self) -> usize {
        CUBE_DIM
    }

    fn visit_residuals(&self, x: &[f64], mut visit: impl FnMut(usize, f64)) {
        visit(0, x[0] - 1.0);
        for i in 1..CUBE_DIM {
            visit(i, 10.0 * (x[i] - x[i - 1] * x[i - 1] * x[i - 1]));
        }
    }

    fn grad_sum_sq(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; CUBE_DIM];
        g[0] += 2.0 * (x[0] - 1.0);
        for i in 1..CUBE_DIM {
            let phi = 10.0 * (x[i] - x[i - 1] * x[i - 1] * x[i - 1]);
            g[i] += 2.0 * phi * 10.0;
            g[i - 1] += 2.0 * phi * (-30.0 * x[i - 1] * x[i - 1]);
        }
        g
    }

    fn x0(&self) -> Vec<f64> {
        (0..CUBE_DIM)
            .map(|i| if i % 2 == 0 { -1.2 } else { 1.0 })
            .collect()
    }

    fn f_star(&self) -> f64 {
        0.0
    }
}

// ---------------------------------------------------------------------------
// Chebyquad, d = 30, p = 45 (overdetermined).
//
// phi_j = (1/d) sum_i T*_{j+1}(x_i) - c_{j+1}, where T*_k are shifted
// Chebyshev polynomials on [0, 1] and c_k = integral of T*_k over [0, 1]
// (zero for odd k, -1/(k^2 - 1) for even k). Start: x_i = (i+1)/(d+1).
// ---------------------------------------------------------------------------

const CHEBYQUAD_DIM: usize = 30;
const CHEBYQUAD_RES: usize = 45;
const CHEBYQUAD_F_STAR: f64 = 1.73615086138381239e-2;

#[derive(Debug, Clone, Copy, Default)]
pub struct Chebyquad;

impl Chebyquad {
    /// T*_1(t) .. T*_p(t) into `out` (length p).
    fn cheb_row(t: f64, out: &mut [f64]) {
        let s = 2.0 * t - 1.0;
        let mut prev = 1.0; // T*_0
        let mut cur = s; // T*_1
        out[0] = cur;
        for slot in out.iter_mut().skip(1) {
            let next = 2.0 * s * cur - prev;
            prev = cur;
            cur = next;
            *slot = cur;
        }
    }

    fn integral(k: usize) -> f64 {
        if k % 2 == 0 {
            -1.0 / ((k * k - 1) as f64)
        } else {
            0.0
        }
    }
}

impl ResidualFamily for Chebyquad {
    fn id(&self) -> &'static str {
        "chebyquad"
    }

    fn dim(&self) -> usize {
        CHEBYQUAD_DIM
    }

    fn num_residuals(&self) -> usize {
        CHEBYQUAD_RES
    }

    fn visit_residuals(&self, x: &[f64], mut visit: impl FnMut(usize, f64)) {
        // One scratch row per call; the d*p recurrence work dominates it.
        let mut sums = vec![0.0; CHEBYQUAD_RES];
        let mut row = [0.0; CHEBYQUAD_RES];
        for &xi in x {
            Self::cheb_row(xi, &mut row);
            for (s, r) in sums.iter_mut().zip(&row) {
                *s += r;
            }
        }
        let inv_d = 1.0 / CHEBYQUAD_DIM as f64;
        for (j, s) in sums.into_iter().enumerate() {
            visit(j, s * inv_d - Self::integral(j + 1));
        }
    }

    fn grad_sum_sq(&self, x: &[f64]) -> Vec<f64> {
        let mut phi = vec![0.0; CHEBYQUAD_RES];
        self.visit_residuals(x, |j, v| phi[j] = v);
        let inv_d = 1.0 / CHEBYQUAD_DIM as f64;
        let mut g = vec![0.0; CHEBYQUAD_DIM];
        for (gi, &xi) in g.iter_mut().zip(x) {
            // D*_k(t): D*_1 = 2, D*_{k+1} = 4 T*_k + 2(2t-1) D*_k - D*_{k-1}
            let s = 2.0 * xi - 1.0;
            let mut t_prev = 1.0;
            let mut t_cur = s;
            let mut d_prev = 0.0;
            let mut d_cur = 2.0;
            let mut acc = 2.0 * phi[0] * d_cur * inv_d;
            for &p in phi.iter().skip(1) {
                let t_next = 2.0 * s * t_cur - t_prev;
                let d_next = 4.0 * t_cur + 2.0 * s * d_cur - d_prev;
                t_prev = t_cur;
                t_cur = t_next;
                d_prev = d_cur;
                d_cur = d_next;
                acc += 2.0 * p * d_cur * inv_d;
            }
            *gi = acc;
        }
        g
    }

    fn x0(&self) -> Vec<f64> {
        (0..CHEBYQUAD_DIM)
            .map(|i| (i + 1) as f64 / (CHEBYQUAD_DIM + 1) as f64)
            .collect()
    }

    fn f_star(&self) -> f64 {
        CHEBYQUAD_F_STAR
    }
}

// ---------------------------------------------------------------------------
// Osborne 2, d = 11, p = 65.
//
// Exponential data-fitting model
//   m(t; x) = x_0 e^{-t x_4} + x_1 e^{-(t-x_8)^2 x_5}
//           + x_2 e^{-(t-x_9)^2 x_6} + x_3 e^{-(t-x_10)^2 x_7}
// with t_i = i/10 and residuals phi_i = y_i - m(t_i; x).
// ---------------------------------------------------------------------------

const OSBORNE2_DIM: usize = 11;
const OSBORNE2_F_STAR: f64 = 4.01377362935477697e-2;

#[rustfmt::skip]
const OSBORNE2_Y: [f64; 65] = [
    1.366, 1.191, 1.112, 1.013, 0.991, 0.885, 0.831, 0.847, 0.786, 0.725,
    0.746, 0.679, 0.608, 0.655, 0.616, 0.606, 0.602, 0.626, 0.651, 0.724,
    0.649, 0.649, 0.694, 0.644, 0.624, 0.661, 0.612, 0.558, 0.533, 0.495,
    0.500, 0.423, 0.395, 0.375, 0.372, 0.391, 0.396, 0.405, 0.428, 0.429,
    0.523, 0.562, 0.607, 0.653, 0.672, 0.708, 0.633, 0.668, 0.645, 0.632,
    0.591, 0.559, 0.597, 0.625, 0.739, 0.710, 0.729, 0.720, 0.636, 0.581,
    0.428, 0.292, 0.162, 0.098, 0.054,
];

#[derive(Debug, Clone, Copy, Default)]
pub struct Osborne2;

impl ResidualFamily for Osborne2 {
    fn id(&self) -> &'static str {
        "osborne2"
    }

    fn dim(&self) -> usize {
        OSBORNE2_DIM
    }

    fn num_residuals(&self) -> usize {
        OSBORNE2_Y.len()
    }

    fn visit_residuals(&self, x: &[f64], mut visit: impl FnMut(usize, f64)) {
        for (i, &y) in OSBORNE2_Y.iter().enumerate() {
            let t = i as f64 / 10.0;
            let model = x[0] * (-t * x[4]).exp()
                + x[1] * (-(t - x[8]) * (t - x[8]) * x[5]).exp()
                + x[2] * (-(t - x[9]) * (t - x[9]) * x[6]).exp()
                + x[3] * (-(t - x[10]) * (t - x[10]) * x[7]).exp();
            visit(i, y - model);
        }
    }

    fn grad_sum_sq(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; OSBORNE2_DIM];
        for (i, &y) in OSBORNE2_Y.iter().enumerate() {
            let t = i as f64 / 10.0;
            let e1 = (-t * x[4]).exp();
            let e2 = (-(t - x[8]) * (t - x[8]) * x[5]).exp();
            let e3 = (-(t - x[9]) * (t - x[9]) * x[6]).exp();
            let e4 = (-(t - x[10]) * (t - x[10]) * x[7]).exp();
            let phi = y - (x[0] * e1 + x[1] * e2 + x[2] * e3 + x[3] * e4);
            let w = 2.0 * phi;
            g[0] += w * -e1;
            g[1] += w * -e2;
            g[2] += w * -e3;
            g[3] += w * -e4;
            g[4] += w * x[0] * t * e1;
            g[5] += w * x[1] * (t - x[8]) * (t - x[8]) * e2;
            g[6] += w * x[2] * (t - x[9]) * (t - x[9]) * e3;
            g[7] += w * x[3] * (t - x[10]) * (t - x[10]) * e4;
            g[8] += w * -2.0 * x[1] * x[5] * (t - x[8]) * e2;
            g[9] += w * -2.0 * x[2] * x[6] * (t - x[9]) * e3;
            g[10] += w * -2.0 * x[3] * x[7] * (t - x[10]) * e4;
        }
        g
    }

    fn x0(&self) -> Vec<f64> {
        vec![1.3, 0.65, 0.65, 0.7, 0.6, 3.0, 5.0, 7.0, 2.0, 4.5, 5.5]
    }

    fn f_star(&self) -> f64 {
        OSBORNE2_F_STAR
    }
}
