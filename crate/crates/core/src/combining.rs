//! Amplify-and-forward dual-hop SNR and the MRC equivalent SNR at D.
//!
//! Powers are ratios to the baseline power `S` throughout.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::channel::FadingRealization;
use crate::error::{Error, Result};

/// How relayed paths are combined into the destination SNR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combining {
    /// AF dual-hop SNR `AB / (A + B + 1)`.
    #[default]
    Exact,
    /// Weaker-hop bound `min(A, B)`.
    UpperBound,
}

/// Source power and per-relay powers, as ratios to `S`. Relay keys are
/// 0-based relay indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PowerAllocation {
    pub source: f64,
    pub relays: BTreeMap<usize, f64>,
}

impl PowerAllocation {
    pub fn new(source: f64, relays: impl IntoIterator<Item = (usize, f64)>) -> Self {
        Self {
            source,
            relays: relays.into_iter().collect(),
        }
    }

    pub fn relay(&self, i: usize) -> Option<f64> {
        self.relays.get(&i).copied()
    }

    pub fn total(&self) -> f64 {
        self.source + self.relays.values().sum::<f64>()
    }
}

/// Network sum-power budget in units of `S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBudget {
    pub total: f64,
}

impl PowerBudget {
    pub fn new(total: f64) -> Result<Self> {
        if !(total >= 0.0 && total.is_finite()) {
            return Err(Error::InfeasibleBudget(format!("total power must be finite and nonnegative, got {total}")));
        }
        Ok(Self { total })
    }

    /// `(N_R + 1)·S`.
    pub fn for_relays(n_relays: usize) -> Self {
        Self {
            total: (n_relays + 1) as f64,
        }
    }
}

/// Dual-hop AF SNR `(ss·γ_si · si·γ_id) / (ss·γ_si + si·γ_id + 1)`.
pub fn dual_hop_snr(ss_ratio: f64, si_ratio: f64, gamma_si: f64, gamma_id: f64) -> f64 {
    let first = ss_ratio * gamma_si;
    let second = si_ratio * gamma_id;
    let num = first * second;
    if num == 0.0 {
        return 0.0;
    }
    num / (first + second + 1.0)
}

/// Weaker-hop bound `min(ss·γ_si, si·γ_id)`.
pub fn dual_hop_snr_upper(ss_ratio: f64, si_ratio: f64, gamma_si: f64, gamma_id: f64) -> f64 {
    (ss_ratio * gamma_si).min(si_ratio * gamma_id)
}

pub fn dual_hop(combining: Combining, ss_ratio: f64, si_ratio: f64, gamma_si: f64, gamma_id: f64) -> f64 {
    match combining {
        Combining::Exact => dual_hop_snr(ss_ratio, si_ratio, gamma_si, gamma_id),
        Combining::UpperBound => dual_hop_snr_upper(ss_ratio, si_ratio, gamma_si, gamma_id),
    }
}

/// MRC equivalent SNR: direct path plus every cooperating relay path.
pub fn equivalent_snr(
    alloc: &PowerAllocation,
    fading: &FadingRealization,
    coop: &[usize],
    combining: Combining,
) -> Result<f64> {
    let mut total = alloc.source * fading.gamma_sd;
    for &i in coop {
        let si = alloc.relay(i).ok_or(Error::MissingRelayPower(i))?;
        total += dual_hop(combining, alloc.source, si, fading.gamma_s[i], fading.gamma_d[i]);
    }
    Ok(total)
}
