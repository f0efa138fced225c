//! One cooperating relay with optimized source/relay power, exact AF SNR.
//!
//! Condition on `γ_sd = g` and the strongest source-relay SNR `x`. For
//! mode `n` the source power is capped at `cap = min(T, Γ_n^r / x)`, and
//! relay `i` with `γ_si = y` reaches `Γ_n^d` exactly when `γ_id ≥ t_n(y)`,
//! where `t_n` solves `V*(γ_id) = Γ_n^d` for the optimal single-relay SNR
//! `V*`. So
//!
//! ```text
//! Pr(relay i reaches Γ_n^d | g, x) = E[e^{-t_n(γ_si)/ḡ_id} | max = x]
//! ```
//!
//! and the relays are combined according to [`Conditioning`].

use crate::analysis::order_stats::{one_minus_exp_neg, MaxSnrStats};
use crate::analysis::{upper_envelope, AnalysisOptions, Conditioning, ErrorSlot, ModeDistribution, ModeEvents};
use crate::channel::AverageSnrProfile;
use crate::combining::PowerBudget;
use crate::error::{Error, Result};
use crate::modes::{ModeTable, QosTargets};
use crate::numeric::{exponential_quantile_cut, integrate_with_breaks};

/// Smallest `γ_id` at which one relay with `γ_sd`, `γ_si` reaches `target`
/// under optimized power with total `total` and source cap `cap`. Returns 0
/// if the direct link alone suffices and `∞` if no `γ_id` does.
///
/// At source power `S` (relay power `T − S`) the target needs
///
/// ```text
/// q(S) = (Γ − g S)(y S + 1) / (((y + g) S − Γ)(T − S))
/// ```
///
/// and the threshold is the minimum of `q` over `(Γ/(y+g), cap]`. `q` blows
/// up at both ends of `(Γ/(y+g), T)`, so the minimum sits at a root of the
/// quadratic `q' = 0` or at the cap.
pub fn single_relay_threshold(gamma_sd: f64, gamma_si: f64, total: f64, cap: f64, target: f64) -> f64 {
    let (g, y, t, big) = (gamma_sd, gamma_si, total, target);
    let cap = cap.min(t);
    if g * cap >= big {
        return 0.0;
    }
    // Supremum over γ_id: all of the capped source power, relay power → 0.
    if cap * (g + y) <= big {
        return f64::INFINITY;
    }
    let lo = big / (y + g);
    let q = |s: f64| (big - g * s) * (y * s + 1.0) / (((y + g) * s - big) * (t - s));

    let a = big * y * y - g * (y + g) * (t * y + 1.0);
    let b = 2.0 * big * (t * g * y + g + y);
    let c = -big * (big * t * y + big + t * y);
    let mut roots = [f64::NAN; 2];
    if a == 0.0 {
        roots[0] = -c / b;
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let h = -0.5 * (b + disc.sqrt());
            roots = [c / h, h / a];
        }
    }
    let mut best = if cap < t { q(cap) } else { f64::INFINITY };
    for r in roots {
        if r > lo && r < cap {
            best = best.min(q(r));
        }
    }
    best.max(0.0)
}

struct Setup<'a> {
    profile: &'a AverageSnrProfile,
    stats: MaxSnrStats,
    total: f64,
    gamma_r: Vec<f64>,
    gamma_d: Vec<f64>,
    options: &'a AnalysisOptions,
}

impl Setup<'_> {
    /// Smallest `t_n(y)` over `n` in `modes`.
    fn threshold(&self, modes: &[usize], gamma_sd: f64, x: f64, y: f64) -> f64 {
        let mut best = f64::INFINITY;
        for &n in modes {
            let cap = (self.gamma_r[n] / x).min(self.total);
            best = best.min(single_relay_threshold(gamma_sd, y, self.total, cap, self.gamma_d[n]));
            if best == 0.0 {
                break;
            }
        }
        best
    }

    /// `E[e^{-t(y)/ḡ_id} · 1{y < x}]` against the untruncated density
    /// `(1/ḡ_si) e^{-y/ḡ_si}`.
    fn continuous_part(&self, i: usize, modes: &[usize], gamma_sd: f64, x: f64) -> Result<f64> {
        let ms = self.profile.mean_s[i];
        let md = self.profile.mean_d[i];
        // Below its cutoff even an unlimited γ_id falls short of mode n;
        // each cutoff is a potential step of the integrand.
        let mut points: Vec<f64> = modes
            .iter()
            .map(|&n| {
                let cap = (self.gamma_r[n] / x).min(self.total);
                (self.gamma_d[n] / cap - gamma_sd).max(0.0)
            })
            .collect();
        let y_lo = points.iter().copied().fold(f64::INFINITY, f64::min);
        if y_lo >= x {
            return Ok(0.0);
        }
        points.push(x);
        let points = clean(points, y_lo, x);
        let r = integrate_with_breaks(
            |y| {
                let t = self.threshold(modes, gamma_sd, x, y);
                (-y / ms).exp() / ms * (-t / md).exp()
            },
            &points,
            self.options.inner(),
        )?;
        Ok(r.value)
    }

    /// `Pr(some relay reaches its threshold | γ_sd, x)`.
    fn conditional(&self, modes: &[usize], gamma_sd: f64, x: f64) -> Result<f64> {
        let nr = self.stats.n_relays();
        let mut atom_hit = Vec::with_capacity(nr);
        let mut cont_hit = Vec::with_capacity(nr);
        let t_atom = self.threshold(modes, gamma_sd, x, x);
        for i in 0..nr {
            let t = t_atom;
            atom_hit.push((-t / self.profile.mean_d[i]).exp());
            if nr > 1 {
                let span = one_minus_exp_neg(x / self.profile.mean_s[i]);
                let c = self.continuous_part(i, modes, gamma_sd, x)?;
                // Probability given γ_si is truncated below x.
                cont_hit.push(if span > 0.0 { (c / span).min(1.0) } else { 0.0 });
            } else {
                cont_hit.push(0.0);
            }
        }
        if nr == 1 {
            return Ok(atom_hit[0]);
        }
        let weights: Vec<f64> = (0..nr).map(|i| self.stats.atom_weight(i, x)).collect();
        Ok(match self.options.conditioning {
            Conditioning::ProductOfMarginals => {
                let miss: f64 = (0..nr)
                    .map(|i| 1.0 - (weights[i] * atom_hit[i] + (1.0 - weights[i]) * cont_hit[i]))
                    .product();
                1.0 - miss
            }
            Conditioning::Exact => {
                let mut total = 0.0;
                for k in 0..nr {
                    let miss: f64 = (0..nr)
                        .map(|i| if i == k { 1.0 - atom_hit[i] } else { 1.0 - cont_hit[i] })
                        .product();
                    total += weights[k] * (1.0 - miss);
                }
                total
            }
        })
    }

    /// Probability that at least one mode in `modes` (0-based) is admissible.
    fn admissible(&self, modes: &[usize]) -> Result<f64> {
        let mean_sd = self.profile.mean_sd;
        let cut_sd = exponential_quantile_cut(mean_sd, self.options.tail);
        let cut_x = self.stats.quantile_cut(self.options.tail);
        let inner = self.options.inner();

        let mut sd_points = vec![0.0, cut_sd];
        for &n in modes {
            sd_points.push(self.gamma_d[n] / self.total);
        }
        let sd_points = clean(sd_points, 0.0, cut_sd);

        let slot = ErrorSlot::default();
        let outer = integrate_with_breaks(
            |g| {
                let mut x_points = vec![0.0, cut_x];
                for &n in modes {
                    let (r, d) = (self.gamma_r[n], self.gamma_d[n]);
                    x_points.push(r / self.total);
                    // Direct link alone suffices below this x.
                    x_points.push(r * g / d);
                    // The relay at the maximum can help only below these,
                    // for the cap r/x and for the cap T respectively. With
                    // strong relay-destination links the hit probability
                    // drops like a step there.
                    if d > r {
                        x_points.push(r * g / (d - r));
                    }
                    x_points.push(d / self.total - g);
                }
                let x_points = clean(x_points, 0.0, cut_x);
                let r = integrate_with_breaks(
                    |x| {
                        let p = slot.take_value(self.conditional(modes, g, x));
                        self.stats.c(x) * p
                    },
                    &x_points,
                    inner,
                );
                (-g / mean_sd).exp() / mean_sd * slot.take_value(r.map(|r| r.value))
            },
            &sd_points,
            self.options.quadrature,
        )?;
        slot.check()?;
        Ok(outer.value.clamp(0.0, 1.0))
    }
}

fn clean(mut points: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    for p in &mut points {
        *p = p.clamp(lo, hi);
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}

/// Mode distribution when the best single relay cooperates with optimized
/// power (`N_C = 1`, any `N_R`).
pub fn tm_probs_single_relay_adaptive(
    profile: &AverageSnrProfile,
    table: &ModeTable,
    targets: &QosTargets,
    budget: &PowerBudget,
    options: &AnalysisOptions,
) -> Result<ModeDistribution> {
    profile.validate()?;
    if !(budget.total > 0.0) {
        return Err(Error::InfeasibleBudget(format!("total power {} must be positive", budget.total)));
    }
    let th = table.thresholds(targets)?;
    let setup = Setup {
        profile,
        stats: MaxSnrStats::new(profile.mean_s.clone())?,
        total: budget.total,
        gamma_r: th.gamma_r.clone(),
        gamma_d: th.gamma_d.clone(),
        options,
    };
    let n = table.len();
    let mut exceed = Vec::with_capacity(n);
    for m in 0..n {
        let modes: Vec<usize> = match options.events {
            ModeEvents::Nested => vec![m],
            ModeEvents::Union => (m..n).collect(),
        };
        exceed.push(setup.admissible(&modes)?);
    }
    if options.events == ModeEvents::Nested {
        upper_envelope(&mut exceed);
    }
    ModeDistribution::from_exceedance(&exceed)
}
