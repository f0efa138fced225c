//! Constant-power relays (`S_i = S`), adaptive source power, cooperating set
//! fixed by mean source-relay SNR, weaker-hop SNR model.
//!
//! Given the strongest source-relay SNR `x`, mode `n` uses source power
//! `σ = min(T − N_C, Γ_n^r / x)` and
//!
//! ```text
//! γ_eq = σ γ_sd + Σ_{i ∈ coop} min(σ γ_si, γ_id)
//! ```
//!
//! whose conditional MGF is a product of closed-form factors. The CDF at
//! `Γ_n^d` comes from numerical Laplace inversion.
//!
//! For one relay and a fixed `γ_si = y`, with `k = 1/ḡ_id`:
//!
//! ```text
//! E[e^{-s min(σy, γ_id)}] = (k + s e^{-(k+s)σy}) / (k + s)
//! ```
//!
//! Averaging over `y ~ (1/ḡ_si) e^{-y/ḡ_si}` on `[0, x)`, with
//! `u = 1/ḡ_si + (k+s)σ`, gives
//! `k/(k+s) (1 − e^{-x/ḡ_si}) + s/(k+s) (1 − e^{-xu}) / (ḡ_si u)`.

use num_complex::Complex64;

use crate::analysis::order_stats::{one_minus_exp_neg, MaxSnrStats};
use crate::analysis::{upper_envelope, AnalysisOptions, Conditioning, ErrorSlot, ModeDistribution, ModeEvents};
use crate::channel::AverageSnrProfile;
use crate::combining::PowerBudget;
use crate::error::{Error, Result};
use crate::modes::{ModeTable, QosTargets};
use crate::numeric::integrate_with_breaks;
use crate::schemes::top_indices;

/// A relay's MGF factor split as `P(s) + Q(s) e^{-sσx}`.
#[derive(Clone, Copy)]
struct Split {
    p: Complex64,
    q: Complex64,
}

impl Split {
    #[cfg(test)]
    fn at(self, delay: Complex64) -> Complex64 {
        self.p + self.q * delay
    }

    fn mix(self, w: f64, other: Split) -> Split {
        Split {
            p: w * self.p + (1.0 - w) * other.p,
            q: w * self.q + (1.0 - w) * other.q,
        }
    }
}

/// Factor of `min(σ x, γ_id)` (relay at the maximum).
fn atom_factor(s: Complex64, sigma: f64, x: f64, mean_d: f64) -> Split {
    let k = 1.0 / mean_d;
    Split {
        p: k / (k + s),
        q: (-k * sigma * x).exp() * s / (k + s),
    }
}

/// Factor of `min(σ γ_si, γ_id)` with `γ_si` truncated to `[0, x)`.
fn truncated_factor(s: Complex64, sigma: f64, x: f64, mean_s: f64, mean_d: f64) -> Split {
    let k = 1.0 / mean_d;
    let span = one_minus_exp_neg(x / mean_s);
    if span <= 0.0 {
        // Degenerate truncation: γ_si = 0.
        return Split {
            p: Complex64::new(1.0, 0.0),
            q: Complex64::new(0.0, 0.0),
        };
    }
    let u = 1.0 / mean_s + (k + s) * sigma;
    let scale = s / (k + s) / (mean_s * u * span);
    Split {
        p: k / (k + s) + scale,
        q: -scale * (-x / mean_s - k * sigma * x).exp(),
    }
}

/// Multiply polynomials in `e^{-sσx}`.
fn poly_mul(a: &[Complex64], f: Split) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + 1];
    for (j, &c) in a.iter().enumerate() {
        out[j] += c * f.p;
        out[j + 1] += c * f.q;
    }
    out
}

/// Conditional MGF as a polynomial in `e^{-sσx}`: entry `j` multiplies
/// `e^{-jsσx}` and is itself free of delays.
fn mgf_terms(
    profile: &AverageSnrProfile,
    stats: &MaxSnrStats,
    coop: &[usize],
    sigma: f64,
    x: f64,
    conditioning: Conditioning,
    s: Complex64,
) -> Vec<Complex64> {
    let direct = 1.0 / (1.0 + s * sigma * profile.mean_sd);
    let atom = |i: usize| atom_factor(s, sigma, x, profile.mean_d[i]);
    let trunc = |i: usize| truncated_factor(s, sigma, x, profile.mean_s[i], profile.mean_d[i]);
    let one = vec![direct];
    match conditioning {
        Conditioning::ProductOfMarginals => coop
            .iter()
            .fold(one, |acc, &i| poly_mul(&acc, atom(i).mix(stats.atom_weight(i, x), trunc(i)))),
        Conditioning::Exact => {
            let mut total = vec![Complex64::new(0.0, 0.0); coop.len() + 1];
            for k in 0..stats.n_relays() {
                let w = stats.atom_weight(k, x);
                if w == 0.0 {
                    continue;
                }
                let term = coop
                    .iter()
                    .fold(one.clone(), |acc, &i| poly_mul(&acc, if i == k { atom(i) } else { trunc(i) }));
                for (t, v) in total.iter_mut().zip(term) {
                    *t += w * v;
                }
            }
            total
        }
    }
}

/// Conditional MGF `E[e^{-s γ_eq} | max_j γ_sj = x]` at source power `sigma`.
pub fn cpr_conditional_mgf(
    profile: &AverageSnrProfile,
    stats: &MaxSnrStats,
    coop: &[usize],
    sigma: f64,
    x: f64,
    conditioning: Conditioning,
    s: Complex64,
) -> Complex64 {
    let delay = (-s * sigma * x).exp();
    mgf_terms(profile, stats, coop, sigma, x, conditioning, s)
        .into_iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * delay + c)
}

/// `Pr(γ_eq ≤ z | max_j γ_sj = x)` at source power `sigma`.
pub fn cpr_conditional_cdf(
    profile: &AverageSnrProfile,
    coop: &[usize],
    sigma: f64,
    x: f64,
    z: f64,
    options: &AnalysisOptions,
) -> Result<f64> {
    let stats = MaxSnrStats::new(profile.mean_s.clone())?;
    conditional_cdf(profile, &stats, coop, sigma, x, z, options)
}

fn conditional_cdf(
    profile: &AverageSnrProfile,
    stats: &MaxSnrStats,
    coop: &[usize],
    sigma: f64,
    x: f64,
    z: f64,
    options: &AnalysisOptions,
) -> Result<f64> {
    if sigma <= 0.0 {
        return Ok(1.0);
    }
    let cond = options.conditioning;
    let tau = sigma * x;
    // Delays put kinks in the CDF that the Euler series cannot resolve, so
    // each delay-free term is inverted separately and shifted. For tiny
    // delays the split only loses precision and the kinks do not matter.
    let value = if tau < 1e-6 * z {
        options
            .inverter
            .cdf_from_mgf(|s| cpr_conditional_mgf(profile, stats, coop, sigma, x, cond, s), z)
    } else {
        (0..=coop.len())
            .filter(|&j| z > j as f64 * tau)
            .map(|j| {
                options
                    .inverter
                    .cdf_from_mgf(|s| mgf_terms(profile, stats, coop, sigma, x, cond, s)[j], z - j as f64 * tau)
            })
            .sum()
    };
    // Inversion noise of a few 1e-8 is expected; anything larger is a failure.
    if !value.is_finite() || !(-1e-6..=1.0 + 1e-6).contains(&value) {
        return Err(Error::InversionFailure { z, value });
    }
    Ok(value.clamp(0.0, 1.0))
}

/// Mode distribution of constant-power relays with the `n_coop` relays of
/// largest mean source-relay SNR cooperating. With `n_coop = N_R` every
/// selection rule gives the same result.
pub fn tm_probs_laura3_cpr(
    profile: &AverageSnrProfile,
    table: &ModeTable,
    targets: &QosTargets,
    budget: &PowerBudget,
    n_coop: usize,
    options: &AnalysisOptions,
) -> Result<ModeDistribution> {
    profile.validate()?;
    if options.events == ModeEvents::Union {
        return Err(Error::UnsupportedAnalysis("union mode events with constant-power relays".into()));
    }
    if n_coop == 0 || n_coop > profile.n_relays() {
        return Err(Error::InvalidArgument(format!("n_coop = {n_coop} with {} relays", profile.n_relays())));
    }
    let left = budget.total - n_coop as f64;
    if !(left > 0.0) {
        return Err(Error::InfeasibleCpr { total: budget.total, n_coop });
    }
    let th = table.thresholds(targets)?;
    let stats = MaxSnrStats::new(profile.mean_s.clone())?;
    let coop = top_indices(&profile.mean_s, n_coop);
    let cut = stats.quantile_cut(options.tail);

    let mut exceed = Vec::with_capacity(table.len());
    for n in 1..=table.len() {
        let (r, d) = (th.security(n), th.reliability(n));
        let slot = ErrorSlot::default();
        let knee = (r / left).min(cut);
        let integral = integrate_with_breaks(
            |x| {
                let sigma = left.min(r / x);
                let f = slot.take_value(conditional_cdf(profile, &stats, &coop, sigma, x, d, options));
                stats.c(x) * (1.0 - f)
            },
            &[0.0, knee, cut],
            options.quadrature,
        )?;
        slot.check()?;
        exceed.push(integral.value.clamp(0.0, 1.0));
    }
    if options.events == ModeEvents::Nested {
        upper_envelope(&mut exceed);
    }
    ModeDistribution::from_exceedance(&exceed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{integrate, QuadratureOptions};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn direct_link_pair() {
        // No relay contribution: MGF 1/(1 + s σ ḡ_sd), CDF 1 − e^{-z/(σ ḡ_sd)}.
        let profile = AverageSnrProfile::new(3.0, vec![1.0], vec![1.0]).unwrap();
        let opts = AnalysisOptions::default();
        for &sigma in &[0.2, 1.0, 4.0] {
            for &z in &[0.1, 1.0, 10.0] {
                let got = opts.inverter.cdf_from_mgf(|s| 1.0 / (1.0 + s * sigma * profile.mean_sd), z);
                let want = 1.0 - (-z / (sigma * 3.0f64)).exp();
                assert!((got - want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn factors_match_quadrature_at_real_s() {
        let (sigma, x, ms, md) = (0.7, 2.3, 1.4, 0.9);
        for &s in &[0.0, 0.3, 2.0, 9.0] {
            let m = |y: f64| {
                let k = 1.0 / md;
                (k + s * (-(k + s) * sigma * y).exp()) / (k + s)
            };
            // m(y) against the γ_id integral directly.
            let y = 1.1;
            let direct = integrate(
                |g| (-g / md).exp() / md * (-s * (sigma * y).min(g)).exp(),
                0.0,
                80.0,
                QuadratureOptions::default().with_rel_tol(1e-12),
            )
            .unwrap()
            .value;
            assert!((m(y) - direct).abs() < 1e-9);
            let delay = c((-s * sigma * x).exp(), 0.0);
            assert!((atom_factor(c(s, 0.0), sigma, x, md).at(delay).re - m(x)).abs() < 1e-14);
            let span = one_minus_exp_neg(x / ms);
            let avg = integrate(|y| (-y / ms).exp() / ms * m(y), 0.0, x, QuadratureOptions::default().with_rel_tol(1e-12))
                .unwrap()
                .value
                / span;
            assert!((truncated_factor(c(s, 0.0), sigma, x, ms, md).at(delay).re - avg).abs() < 1e-12);
        }
    }

    #[test]
    fn conditionings_agree_for_one_relay() {
        let profile = AverageSnrProfile::new(2.0, vec![1.5], vec![3.0]).unwrap();
        let stats = MaxSnrStats::new(profile.mean_s.clone()).unwrap();
        for &s in &[c(0.5, 0.0), c(1.0, 3.0)] {
            let a = cpr_conditional_mgf(&profile, &stats, &[0], 0.8, 1.2, Conditioning::ProductOfMarginals, s);
            let b = cpr_conditional_mgf(&profile, &stats, &[0], 0.8, 1.2, Conditioning::Exact, s);
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn mgf_is_one_at_zero() {
        let profile = AverageSnrProfile::new(2.0, vec![1.5, 0.4, 3.0], vec![3.0, 1.0, 0.7]).unwrap();
        let stats = MaxSnrStats::new(profile.mean_s.clone()).unwrap();
        for cond in [Conditioning::ProductOfMarginals, Conditioning::Exact] {
            let m = cpr_conditional_mgf(&profile, &stats, &[0, 2], 0.8, 1.2, cond, c(0.0, 0.0));
            assert!((m - c(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn cdf_is_monotone() {
        let profile = AverageSnrProfile::new(5.0, vec![4.0, 3.0], vec![6.0, 2.0]).unwrap();
        let opts = AnalysisOptions::default();
        let mut prev = 0.0;
        for k in 1..120 {
            let z = 0.5 * k as f64;
            let f = cpr_conditional_cdf(&profile, &[0, 1], 1.3, 2.0, z, &opts).unwrap();
            assert!(f >= prev - 1e-6, "z={z}");
            prev = f;
        }
        assert!(prev > 0.9);
    }

    #[test]
    fn sums_to_one() {
        let profile = AverageSnrProfile::new(10.0, vec![8.0, 6.0], vec![30.0, 40.0]).unwrap();
        let d = tm_probs_laura3_cpr(
            &profile,
            &ModeTable::dvbs2(),
            &QosTargets::default(),
            &PowerBudget::for_relays(2),
            2,
            &AnalysisOptions::default(),
        )
        .unwrap();
        assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn infeasible_budget() {
        let profile = AverageSnrProfile::new(10.0, vec![8.0, 6.0], vec![30.0, 40.0]).unwrap();
        let r = tm_probs_laura3_cpr(
            &profile,
            &ModeTable::dvbs2(),
            &QosTargets::default(),
            &PowerBudget::new(2.0).unwrap(),
            2,
            &AnalysisOptions::default(),
        );
        assert!(matches!(r, Err(Error::InfeasibleCpr { .. })));
    }
}
