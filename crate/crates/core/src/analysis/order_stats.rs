//! Distribution of the strongest source-relay SNR and of one relay's SNR
//! given that maximum.
//!
//! With independent exponential `γ_sj` of means `ḡ_j`:
//!
//! ```text
//! C(x)   = Σ_l (1/ḡ_l) e^{-x/ḡ_l} Π_{j≠l} (1 − e^{-x/ḡ_j})          pdf of max_j γ_sj
//! D_i(x) = (1/ḡ_i) e^{-x/ḡ_i} Π_{j≠i} (1 − e^{-x/ḡ_j})              relay i is the max
//! B_i(x) = Σ_{l≠i} (1/ḡ_l) e^{-x/ḡ_l} Π_{j≠l,i} (1 − e^{-x/ḡ_j})
//! f(y | x) = (B_i/C)(1/ḡ_i) e^{-y/ḡ_i} 1{y < x} + (D_i/C) δ(y − x)
//! ```

use crate::error::{Error, Result};

/// Order statistics of the source-relay SNRs.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxSnrStats {
    means: Vec<f64>,
}

/// `γ_si` given `max_j γ_sj = x`: a scaled exponential density on `[0, x)`
/// plus an atom at `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalSnr {
    pub x: f64,
    pub mean: f64,
    /// Coefficient `B_i/C` of `(1/ḡ_i) e^{-y/ḡ_i}` on `[0, x)`.
    pub coefficient: f64,
    /// `D_i/C`, the probability that relay `i` is the maximum.
    pub atom: f64,
}

impl ConditionalSnr {
    /// Density of the continuous part at `y`.
    pub fn density(&self, y: f64) -> f64 {
        if y < 0.0 || y >= self.x {
            0.0
        } else {
            self.coefficient * (-y / self.mean).exp() / self.mean
        }
    }

    /// Mass of the continuous part, `1 − D_i/C`.
    pub fn continuous_mass(&self) -> f64 {
        1.0 - self.atom
    }
}

/// `1 − e^{-u}` without cancellation.
pub(crate) fn one_minus_exp_neg(u: f64) -> f64 {
    -(-u).exp_m1()
}

impl MaxSnrStats {
    pub fn new(means: Vec<f64>) -> Result<Self> {
        if means.is_empty() || means.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidProfile("source-relay means must be positive and finite".into()));
        }
        Ok(Self { means })
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn n_relays(&self) -> usize {
        self.means.len()
    }

    /// CDF of the maximum.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        self.means.iter().map(|&m| one_minus_exp_neg(x / m)).product()
    }

    /// `C(x)`.
    pub fn c(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        (0..self.n_relays()).map(|l| self.d(l, x)).sum()
    }

    /// `D_i(x)`.
    pub fn d(&self, i: usize, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let own = (-x / self.means[i]).exp() / self.means[i];
        own * self.others_product(x, &[i])
    }

    /// `B_i(x)`.
    pub fn b(&self, i: usize, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        (0..self.n_relays())
            .filter(|&l| l != i)
            .map(|l| (-x / self.means[l]).exp() / self.means[l] * self.others_product(x, &[l, i]))
            .sum()
    }

    fn others_product(&self, x: f64, skip: &[usize]) -> f64 {
        self.means
            .iter()
            .enumerate()
            .filter(|(j, _)| !skip.contains(j))
            .map(|(_, &m)| one_minus_exp_neg(x / m))
            .product()
    }

    /// Probability that relay `i` is the strongest given the maximum is `x`,
    /// `D_i(x)/C(x)`, evaluated as a ratio of hazard rates so that it stays
    /// accurate as `x → 0` and for large `x`.
    pub fn atom_weight(&self, i: usize, x: f64) -> f64 {
        let n = self.n_relays();
        if n == 1 {
            return 1.0;
        }
        if x <= 0.0 {
            // Limit of the hazard ratio: each hazard behaves like 1/x.
            return 1.0 / n as f64;
        }
        // ln h_l = −ln ḡ_l − ln(e^{x/ḡ_l} − 1)
        let ln_h: Vec<f64> = self
            .means
            .iter()
            .map(|&m| {
                let u = x / m;
                let ln_expm1 = if u > 30.0 { u + (-(-u).exp()).ln_1p() } else { u.exp_m1().ln() };
                -m.ln() - ln_expm1
            })
            .collect();
        let top = ln_h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = ln_h.iter().map(|&v| (v - top).exp()).sum();
        (ln_h[i] - top).exp() / sum
    }

    pub fn conditional(&self, i: usize, x: f64) -> ConditionalSnr {
        let atom = self.atom_weight(i, x);
        let mean = self.means[i];
        let span = one_minus_exp_neg(x / mean);
        let coefficient = if span > 0.0 { (1.0 - atom) / span } else { 0.0 };
        ConditionalSnr {
            x,
            mean,
            coefficient,
            atom,
        }
    }

    /// Point beyond which the maximum has probability at most `tail`.
    pub fn quantile_cut(&self, tail: f64) -> f64 {
        // P(max > x) ≤ Σ e^{-x/ḡ_j} ≤ N e^{-x/ḡ_max}.
        let top = self.means.iter().copied().fold(0.0, f64::max);
        top * (self.n_relays() as f64 / tail).ln()
    }
}

/// `C(x)`, the density of the strongest source-relay SNR.
pub fn max_snr_pdf(stats: &MaxSnrStats, x: f64) -> f64 {
    stats.c(x)
}

/// Continuous density of `γ_si` at `y` given the maximum `x`, and the atom
/// weight at `y = x`.
pub fn conditional_snr_pdf(stats: &MaxSnrStats, i: usize, y: f64, x: f64) -> (f64, f64) {
    let cond = stats.conditional(i, x);
    (cond.density(y), cond.atom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{integrate, QuadratureOptions};

    fn tight() -> QuadratureOptions {
        QuadratureOptions::default().with_rel_tol(1e-12).with_abs_tol(1e-14)
    }

    #[test]
    fn single_relay_is_plain_exponential() {
        let s = MaxSnrStats::new(vec![2.0]).unwrap();
        for &x in &[0.0, 0.5, 3.0] {
            assert!((s.c(x) - (-x / 2.0f64).exp() / 2.0).abs() < 1e-15);
            let cond = s.conditional(0, x.max(1e-3));
            assert_eq!(cond.atom, 1.0);
            assert_eq!(cond.coefficient, 0.0);
        }
    }

    #[test]
    fn pdf_normalizes() {
        for means in [vec![1.0], vec![1.0, 1.0], vec![0.3, 2.0, 7.0], vec![1.5, 1.49, 1.44, 1.37, 1.28]] {
            let s = MaxSnrStats::new(means).unwrap();
            let cut = s.quantile_cut(1e-15);
            let r = integrate(|x| s.c(x), 0.0, cut, tight()).unwrap();
            assert!((r.value - 1.0).abs() < 1e-8, "{}", r.value);
        }
    }

    #[test]
    fn equal_means_two_relays() {
        let g = 1.7;
        let s = MaxSnrStats::new(vec![g, g]).unwrap();
        for &x in &[0.01, 0.4, 2.0, 9.0, 60.0] {
            let e = (-x / g).exp();
            assert!((s.c(x) - 2.0 / g * e * (1.0 - e)).abs() < 1e-14);
            assert!((s.atom_weight(0, x) - 0.5).abs() < 1e-12);
            assert!((s.d(0, x) / s.c(x) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn atom_weight_matches_definition() {
        let s = MaxSnrStats::new(vec![0.3, 2.0, 7.0]).unwrap();
        for i in 0..3 {
            for &x in &[0.05, 1.0, 6.0, 20.0] {
                let direct = s.d(i, x) / s.c(x);
                assert!((s.atom_weight(i, x) - direct).abs() < 1e-12);
                let cond = s.conditional(i, x);
                assert!((cond.coefficient - s.b(i, x) / s.c(x)).abs() < 1e-10 * (1.0 + cond.coefficient));
            }
        }
    }

    #[test]
    fn conditional_mass_is_one() {
        let s = MaxSnrStats::new(vec![0.3, 2.0, 7.0, 1.1]).unwrap();
        for i in 0..4 {
            for &x in &[0.01, 0.7, 3.0, 25.0] {
                let cond = s.conditional(i, x);
                let cont = integrate(|y| cond.density(y), 0.0, x, tight()).unwrap().value;
                assert!((cont + cond.atom - 1.0).abs() < 1e-8);
            }
        }
    }
}
