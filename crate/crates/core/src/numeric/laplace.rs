//! Numerical inversion of Laplace transforms by Euler summation of the
//! Bromwich integral (Abate–Whitt unified form).
//!
//! ```text
//! f(t) ≈ (10^{M/3} / t) Σ_{k=0}^{2M} η_k Re F(β_k / t)
//! β_k = M ln(10)/3 + iπk
//! ```
//!
//! The η_k are alternating binomial (Euler) averaging weights. With `M = 18`
//! the method resolves smooth CDFs to about 1e-10 in double precision.

use num_complex::Complex64;

/// Precomputed Euler inversion nodes and weights.
#[derive(Debug, Clone)]
pub struct EulerInverter {
    order: usize,
    nodes: Vec<Complex64>,
    weights: Vec<f64>,
    scale: f64,
}

impl Default for EulerInverter {
    fn default() -> Self {
        Self::new(18)
    }
}

impl EulerInverter {
    /// Build an inverter with `order` (M); 2M + 1 transform evaluations per point.
    pub fn new(order: usize) -> Self {
        let m = order.max(1);
        let shift = m as f64 * std::f64::consts::LN_10 / 3.0;
        let nodes = (0..=2 * m)
            .map(|k| Complex64::new(shift, std::f64::consts::PI * k as f64))
            .collect();

        let mut xi = vec![1.0; 2 * m + 1];
        xi[0] = 0.5;
        let tail = 0.5f64.powi(m as i32);
        xi[2 * m] = tail;
        let mut binom = 1.0;
        for k in 1..m {
            binom *= (m - k + 1) as f64 / k as f64;
            xi[2 * m - k] = xi[2 * m - k + 1] + tail * binom;
        }
        let weights = xi
            .iter()
            .enumerate()
            .map(|(k, &x)| if k % 2 == 0 { x } else { -x })
            .collect();

        Self {
            order: m,
            nodes,
            weights,
            scale: 10f64.powf(m as f64 / 3.0),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Invert the transform `transform` at `t > 0`.
    pub fn invert<F: FnMut(Complex64) -> Complex64>(&self, mut transform: F, t: f64) -> f64 {
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(beta, w)| w * transform(beta / t).re)
            .sum();
        self.scale / t * sum
    }

    /// CDF at `z` of a nonnegative random variable with MGF `mgf(s) = E[e^{-sX}]`,
    /// obtained by inverting `mgf(s) / s`.
    pub fn cdf_from_mgf<F: FnMut(Complex64) -> Complex64>(&self, mut mgf: F, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        self.invert(|s| mgf(s) / s, z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_cdf_pair() {
        let inv = EulerInverter::default();
        for &c in &[0.1, 1.0, 7.0, 300.0] {
            for &z in &[1e-3, 0.05, 0.5, 1.0, 3.0, 10.0, 100.0, 1000.0] {
                let got = inv.cdf_from_mgf(|s| 1.0 / (1.0 + s * c), z);
                let want = 1.0 - (-z / c).exp();
                assert!((got - want).abs() < 1e-8, "c={c} z={z} got={got} want={want}");
            }
        }
    }

    #[test]
    fn erlang_density() {
        // 1/(s+1)^2 <-> t e^{-t}
        let inv = EulerInverter::default();
        for &t in &[0.2, 1.0, 4.0] {
            let got = inv.invert(|s| 1.0 / ((s + 1.0) * (s + 1.0)), t);
            assert!((got - t * (-t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn nonpositive_argument() {
        let inv = EulerInverter::default();
        assert_eq!(inv.cdf_from_mgf(|s| 1.0 / (1.0 + s), 0.0), 0.0);
    }
}
