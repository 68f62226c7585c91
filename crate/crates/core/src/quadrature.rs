//! Gaussian quadrature rules used by the hyperelliptic period computation.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Gauss-Chebyshev rule of the first kind on `[a, b]`.
///
/// Approximates `∫_a^b F(x) / sqrt((x-a)(b-x)) dx` by `Σ w_i F(x_i)`. The weight
/// absorbs inverse square-root singularities at both endpoints, so smooth `F`
/// converges spectrally.
pub fn gauss_chebyshev(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let w = PI / n as f64;
    let nodes = (1..=n).map(|i| mid + half * ((2 * i - 1) as f64 * PI / (2 * n) as f64).cos()).collect();
    (nodes, alloc::vec![w; n])
}

/// Gauss-Legendre rule on `[-1, 1]`, nodes by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        // ∫_{-1}^{1} x^14 dx = 2/15, degree 14 < 2·8
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn legendre_high_order_weights_sum_to_two() {
        for n in [1, 2, 63, 64, 257] {
            let (_, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn chebyshev_recovers_arcsine_integrals() {
        // ∫_0^2 x^2 / sqrt(x(2-x)) dx = 3π/2
        let (x, w) = gauss_chebyshev(0.0, 2.0, 16);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert!((s - 1.5 * PI).abs() < 1e-13);
    }
}
