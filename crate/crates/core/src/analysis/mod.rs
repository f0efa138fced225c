//! Semi-analytical transmission-mode probabilities and spectral efficiency.
//!
//! Three cases are covered:
//!
//! - constant power everywhere with one cooperating relay, under the
//!   weaker-hop SNR model ([`tm_probs_constant_power`]);
//! - one cooperating relay with optimized power, exact AF SNR
//!   ([`tm_probs_single_relay_adaptive`]);
//! - constant-power relays with the cooperating set fixed by mean SNR,
//!   weaker-hop model, through the conditional MGF and Laplace inversion
//!   ([`tm_probs_laura3_cpr`]).
//!
//! Each works with the events `A_n` = "mode `n` is admissible" and, by
//! default, reads the mode probabilities as `P_m = Pr(A_m) − Pr(A_{m+1})`.
//! That difference is exact only if the events are nested, which the
//! security clamp breaks (see [`ModeEvents`]); the constant-power case is
//! exact.

mod adaptive;
mod constant_power;
mod cpr;
mod order_stats;

pub use adaptive::{single_relay_threshold, tm_probs_single_relay_adaptive};
pub use constant_power::tm_probs_constant_power;
pub use cpr::{cpr_conditional_cdf, cpr_conditional_mgf, tm_probs_laura3_cpr};
pub use order_stats::{conditional_snr_pdf, max_snr_pdf, ConditionalSnr, MaxSnrStats};

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::modes::ModeTable;
use crate::numeric::{EulerInverter, QuadratureOptions};

/// Probability of each transmission mode; index 0 is outage.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDistribution {
    probs: Vec<f64>,
}

/// Replace `a_n` by `max_{k≥n} a_k`.
pub(crate) fn upper_envelope(a: &mut [f64]) {
    let mut top = 0.0f64;
    for v in a.iter_mut().rev() {
        top = top.max(*v);
        *v = top;
    }
}

/// Slack allowed on the total mass and on individual negative entries.
pub const MASS_TOLERANCE: f64 = 1e-6;

impl ModeDistribution {
    /// `probs[0]` is outage, `probs[n]` mode `n`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let d = Self { probs };
        d.validate()?;
        Ok(d)
    }

    /// From `Pr(TM ≥ n)` style exceedance values `a[n-1]`, `n = 1..N`:
    /// `P_m = a_m − a_{m+1}`, outage `1 − a_1`. Negative differences within
    /// [`MASS_TOLERANCE`] are rounding and are set to zero.
    pub fn from_exceedance(a: &[f64]) -> Result<Self> {
        let n = a.len();
        let mut probs = vec![0.0; n + 1];
        probs[0] = 1.0 - a.first().copied().unwrap_or(0.0);
        for m in 1..=n {
            let next = if m < n { a[m] } else { 0.0 };
            probs[m] = a[m - 1] - next;
        }
        for p in &mut probs {
            if *p < 0.0 && *p > -MASS_TOLERANCE {
                *p = 0.0;
            }
        }
        Self::new(probs)
    }

    /// Empirical distribution from mode counts (index 0 = outage).
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidArgument("no frames counted".into()));
        }
        Self::new(counts.iter().map(|&c| c as f64 / total as f64).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.probs.len() < 2 {
            return Err(Error::InvalidArgument("distribution needs outage plus at least one mode".into()));
        }
        if let Some((m, p)) = self.probs.iter().enumerate().find(|(_, p)| !(**p >= 0.0 && **p <= 1.0 + MASS_TOLERANCE)) {
            return Err(Error::InvalidArgument(format!("mode {m} has probability {p}")));
        }
        let sum: f64 = self.probs.iter().sum();
        if (sum - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidArgument(format!("probabilities sum to {sum}")));
        }
        Ok(())
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn outage(&self) -> f64 {
        self.probs[0]
    }

    /// Probability of mode `n` (1-based).
    pub fn mode(&self, n: usize) -> f64 {
        self.probs[n]
    }

    pub fn n_modes(&self) -> usize {
        self.probs.len() - 1
    }
}

/// `η = Σ_n (R_n / 2) P_n` in bits/s/Hz; the half accounts for the two
/// half-duplex phases.
pub fn spectral_efficiency(dist: &ModeDistribution, table: &ModeTable) -> Result<f64> {
    if dist.n_modes() != table.len() {
        return Err(Error::InvalidArgument(format!(
            "distribution has {} modes, table has {}",
            dist.n_modes(),
            table.len()
        )));
    }
    Ok(table.modes().iter().zip(&dist.probs[1..]).map(|(m, p)| 0.5 * m.rate * p).sum())
}

/// How the relays' source-relay SNRs are treated once their maximum is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Conditioning {
    /// Each relay independently follows its own conditional law (atom with
    /// weight `D_i/C`, continuous part `B_i/C`). This ignores that exactly
    /// one relay sits at the maximum and underestimates η by 5-15% at two
    /// or three relays.
    ProductOfMarginals,
    /// Mixture over which relay attains the maximum; the others are then
    /// independent and truncated below it.
    #[default]
    Exact,
}

/// Which events the mode probabilities are built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModeEvents {
    /// `Pr(TM ≥ n)` is taken as `max_{k≥n} Pr(A_k)`. This is `Pr(A_n)` when
    /// admissibility is nested across modes and otherwise a lower bound on
    /// `Pr(∪_{k≥n} A_k)` that still yields nonnegative mode masses.
    #[default]
    Nested,
    /// `P_m = Pr(∪_{n≥m} A_n) − Pr(∪_{n>m} A_n)`, the actual distribution of
    /// the highest admissible mode. Only available where the union has a
    /// threshold form (the adaptive single-cooperator case).
    Union,
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    /// Tolerances of every integral; inner integrals use a smaller absolute
    /// floor.
    pub quadrature: QuadratureOptions,
    /// Exponential tails beyond this probability are dropped.
    pub tail: f64,
    pub inverter: EulerInverter,
    pub conditioning: Conditioning,
    pub events: ModeEvents,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            quadrature: QuadratureOptions::default().with_rel_tol(1e-6).with_abs_tol(1e-10),
            tail: 1e-9,
            inverter: EulerInverter::default(),
            conditioning: Conditioning::default(),
            events: ModeEvents::default(),
        }
    }
}

impl AnalysisOptions {
    pub fn with_conditioning(mut self, conditioning: Conditioning) -> Self {
        self.conditioning = conditioning;
        self
    }

    pub fn with_events(mut self, events: ModeEvents) -> Self {
        self.events = events;
        self
    }

    pub(crate) fn inner(&self) -> QuadratureOptions {
        self.quadrature.with_abs_tol(self.quadrature.abs_tol * 1e-2)
    }
}

/// First error raised inside a quadrature integrand. Integrands cannot
/// return `Result`, so they park the error here and return 0.
#[derive(Default)]
pub(crate) struct ErrorSlot(RefCell<Option<Error>>);

impl ErrorSlot {
    pub fn take_value(&self, r: Result<f64>) -> f64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                self.0.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    }

    pub fn check(self) -> Result<()> {
        match self.0.into_inner() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}
