//! Constant power at the source and every relay, one cooperating relay,
//! weaker-hop SNR model.
//!
//! The highest reliable mode `m` satisfies `Γ_m^d ≤ γ_eq < Γ_{m+1}^d`. Since
//! `Γ_n^r` grows with `n`, mode `m` is transmitted exactly when additionally
//! every relay has `γ_si ≤ Γ_m^r`; otherwise no lower mode is secure either.
//! Conditioned on `γ_sd` the relays are independent and, with
//! `γ_eq = γ_sd + max_i min(γ_si, γ_id)`,
//!
//! ```text
//! Pr(γ_si ≤ R, min(γ_si, γ_id) < G − γ_sd)
//!   = 1 − e^{-R/ḡ_si} − [e^{-[G−γ_sd]⁺/ḡ_si} − e^{-R/ḡ_si}]⁺ e^{-[G−γ_sd]⁺/ḡ_id}
//! ```

use crate::analysis::order_stats::one_minus_exp_neg;
use crate::analysis::{AnalysisOptions, ModeDistribution};
use crate::channel::AverageSnrProfile;
use crate::error::Result;
use crate::modes::{ModeTable, QosTargets};
use crate::numeric::{integrate, integrate_with_breaks};

fn relay_term(r: f64, g: f64, gamma_sd: f64, mean_s: f64, mean_d: f64) -> f64 {
    let gap = (g - gamma_sd).max(0.0);
    let secure = one_minus_exp_neg(r / mean_s);
    let both_strong = ((-gap / mean_s).exp() - (-r / mean_s).exp()).max(0.0);
    secure - both_strong * (-gap / mean_d).exp()
}

fn secure_and_below(profile: &AverageSnrProfile, r: f64, g: f64, gamma_sd: f64) -> f64 {
    profile
        .mean_s
        .iter()
        .zip(&profile.mean_d)
        .map(|(&ms, &md)| relay_term(r, g, gamma_sd, ms, md))
        .product()
}

/// Mode distribution of constant-power transmission with a single
/// cooperating relay (the best of all `N_R`) under the weaker-hop model.
pub fn tm_probs_constant_power(
    profile: &AverageSnrProfile,
    table: &ModeTable,
    targets: &QosTargets,
    options: &AnalysisOptions,
) -> Result<ModeDistribution> {
    profile.validate()?;
    let th = table.thresholds(targets)?;
    let n = table.len();
    let mean_sd = profile.mean_sd;
    let pdf = |g: f64| (-g / mean_sd).exp() / mean_sd;

    let mut probs = vec![0.0; n + 1];
    for m in 1..=n {
        let r = th.security(m);
        let lo = th.reliability(m);
        let value = if m == n {
            // Pr(all secure, γ_eq ≥ Γ_N^d)
            let all_secure: f64 = profile.mean_s.iter().map(|&ms| one_minus_exp_neg(r / ms)).product();
            // The integrand vanishes once γ_sd alone reaches Γ_N^d.
            let below = integrate(|g| pdf(g) * secure_and_below(profile, r, lo, g), 0.0, lo, options.quadrature)?;
            all_secure - below.value
        } else {
            let hi = th.reliability(m + 1);
            integrate_with_breaks(
                |g| pdf(g) * (secure_and_below(profile, r, hi, g) - secure_and_below(profile, r, lo, g)),
                &[0.0, lo, hi.max(lo)],
                options.quadrature,
            )?
            .value
        };
        probs[m] = value.max(0.0);
    }
    probs[0] = 1.0 - probs[1..].iter().sum::<f64>();
    ModeDistribution::new(probs)
}
