//! Small dense-vector helpers used throughout the crate.
//!
//! Everything operates on `&[f64]` slices; dimensions are asserted, not
//! checked, because callers always control both sides.

/// `x . y`
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `||x||_2^2`
pub fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum()
}

/// `||x||_2`
pub fn norm(x: &[f64]) -> f64 {
    norm_sq(x).sqrt()
}

/// `y += a * x`
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// `x *= a`
pub fn scale(a: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= a;
    }
}

/// `||x - y||_2^2`
pub fn dist_sq(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}
