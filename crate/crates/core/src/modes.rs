//! Transmission-mode catalog and the piecewise BER fit.
//!
//! Each mode's instantaneous BER is modelled as
//!
//! ```text
//! IBER(γ) = 0.5·exp(-p·γ^q)              γ <  γ_lh
//!         = a / (1 + exp(c·(γ - b)))^k     γ >= γ_lh
//! ```
//!
//! where `γ_lh` is where the steep second branch drops below the first one.
//! Fits whose branches only come close (never cross) use the point of
//! closest approach, provided the branches agree there within
//! [`MAX_BRANCH_GAP`].

use std::io::Read;
use std::path::Path;
use std::sync::OnceLock;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Largest relative mismatch `|b1 - b2| / max(b1, b2)` tolerated at `γ_lh`.
pub const MAX_BRANCH_GAP: f64 = 0.10;

const CROSSOVER_SCAN_POINTS: usize = 10_000;
const MONOTONE_GRID_POINTS: usize = 10_000;

const DVBS2_TABLE: &str = include_str!("../data/modes_dvbs2.csv");

/// Fit parameters of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct BerFit {
    pub p: f64,
    pub q: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub k: f64,
}

impl BerFit {
    pub fn new(p: f64, q: f64, a: f64, b: f64, c: f64, k: f64) -> Self {
        Self { p, q, a, b, c, k }
    }

    fn validate(&self) -> Result<()> {
        let positive = [("p", self.p), ("q", self.q), ("a", self.a), ("c", self.c), ("k", self.k)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidMode(format!("fit parameter {name} must be positive, got {v}")));
            }
        }
        if !self.b.is_finite() {
            return Err(Error::InvalidMode("fit parameter b must be finite".into()));
        }
        Ok(())
    }

    /// ln of the low-SNR branch.
    pub fn ln_low(&self, gamma: f64) -> f64 {
        0.5f64.ln() - self.p * gamma.powf(self.q)
    }

    /// ln of the waterfall branch.
    pub fn ln_high(&self, gamma: f64) -> f64 {
        self.a.ln() - self.k * softplus(self.c * (gamma - self.b))
    }

    /// Right end of the crossover search bracket.
    pub fn search_limit(&self) -> f64 {
        (self.b + 20.0 / self.c).max(f64::MIN_POSITIVE)
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Branch intersection of a fit: the smallest γ in `(0, b + 20/c)` at which
/// the waterfall branch falls from above the low-SNR branch to below it.
/// Found by a grid scan for the sign change of `ln b1 - ln b2` and bisection
/// to 1e-12 in γ.
pub fn compute_crossover(fit: &BerFit) -> Result<f64> {
    fit.validate()?;
    let hi = fit.search_limit();
    let diff = |g: f64| fit.ln_low(g) - fit.ln_high(g);
    let step = hi / CROSSOVER_SCAN_POINTS as f64;
    let mut prev_x = 0.0;
    let mut prev_d = diff(0.0);
    for i in 1..=CROSSOVER_SCAN_POINTS {
        let x = step * i as f64;
        let d = diff(x);
        if prev_d < 0.0 && d >= 0.0 {
            return crate::numeric::bisect(diff, prev_x, x, 1e-12, 200);
        }
        prev_x = x;
        prev_d = d;
    }
    Err(Error::NoCrossing { lo: 0.0, hi })
}

/// Point of closest approach of the two branches (minimum of `ln b1 - ln b2`)
/// on the crossover search bracket.
pub fn closest_approach(fit: &BerFit) -> f64 {
    let hi = fit.search_limit();
    let diff = |g: f64| fit.ln_low(g) - fit.ln_high(g);
    let step = hi / CROSSOVER_SCAN_POINTS as f64;
    let best = (0..=CROSSOVER_SCAN_POINTS)
        .map(|i| step * i as f64)
        .fold((0.0, f64::INFINITY), |best, x| {
            let d = diff(x).abs();
            if d < best.1 {
                (x, d)
            } else {
                best
            }
        })
        .0;
    let lo = (best - step).max(0.0);
    let up = (best + step).min(hi);
    crate::numeric::golden_max(|g| -diff(g).abs(), lo, up, 1e-13, 200)
}

/// A modulation-and-coding pair with its BER fit.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionMode {
    pub rate: f64,
    pub fit: BerFit,
    pub gamma_lh: f64,
}

impl TransmissionMode {
    /// Build a mode, computing `γ_lh` and checking the fit is usable:
    /// near-continuous at `γ_lh` and strictly decreasing on `[0, b + 30/c]`.
    pub fn new(rate: f64, fit: BerFit) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidMode(format!("rate must be positive, got {rate}")));
        }
        fit.validate()?;
        let gamma_lh = match compute_crossover(&fit) {
            Ok(g) => g,
            Err(Error::NoCrossing { .. }) => closest_approach(&fit),
            Err(e) => return Err(e),
        };
        let mode = Self { rate, fit, gamma_lh };
        let gap = mode.branch_gap();
        if gap > MAX_BRANCH_GAP {
            return Err(Error::InvalidMode(format!(
                "fit branches differ by {:.1}% at γ_lh = {gamma_lh}",
                100.0 * gap
            )));
        }
        mode.check_monotone()?;
        Ok(mode)
    }

    /// Relative mismatch of the two branches at `γ_lh`.
    pub fn branch_gap(&self) -> f64 {
        let lo = self.fit.ln_low(self.gamma_lh).exp();
        let hi = self.fit.ln_high(self.gamma_lh).exp();
        (lo - hi).abs() / lo.max(hi)
    }

    fn check_monotone(&self) -> Result<()> {
        let end = self.fit.b + 30.0 / self.fit.c;
        let end = end.max(2.0 * self.gamma_lh);
        let step = end / MONOTONE_GRID_POINTS as f64;
        // Log domain: the waterfall branch underflows long before the grid ends.
        let mut prev = self.ln_iber(0.0);
        for i in 1..=MONOTONE_GRID_POINTS {
            let v = self.ln_iber(step * i as f64);
            if !(v < prev) {
                return Err(Error::InvalidMode(format!(
                    "BER fit is not decreasing near γ = {}",
                    step * i as f64
                )));
            }
            prev = v;
        }
        Ok(())
    }

    /// Instantaneous BER at linear SNR `gamma`.
    pub fn iber(&self, gamma: f64) -> f64 {
        self.ln_iber(gamma).exp()
    }

    /// Natural log of [`iber`](Self::iber); finite where `iber` underflows.
    pub fn ln_iber(&self, gamma: f64) -> f64 {
        let gamma = gamma.max(0.0);
        if gamma < self.gamma_lh {
            self.fit.ln_low(gamma)
        } else {
            self.fit.ln_high(gamma)
        }
    }

    /// SNR needed for BER `pe`: the inverse of [`iber`](Self::iber), branch
    /// chosen by comparing `pe` with `iber(γ_lh)`. When the branches do not
    /// meet exactly, BERs inside the jump map to `γ_lh`.
    pub fn snr_for_ber(&self, pe: f64) -> Result<f64> {
        if !(pe > 0.0) {
            return Err(Error::BerOutOfRange { pe, reason: "BER must be positive" });
        }
        if pe > 0.5 {
            return Err(Error::BerOutOfRange { pe, reason: "BER above 0.5" });
        }
        let BerFit { p, q, a, b, c, k } = self.fit;
        if pe > self.iber(self.gamma_lh) {
            let g = ((0.5 / pe).ln() / p).powf(1.0 / q);
            Ok(g.min(self.gamma_lh))
        } else {
            if pe >= a {
                return Err(Error::BerOutOfRange { pe, reason: "waterfall branch never reaches this BER" });
            }
            // (a/pe)^{1/k} - 1 without cancellation.
            let excess = ((a / pe).ln() / k).exp_m1();
            Ok(excess.ln() / c + b)
        }
    }
}

/// Ordered transmission modes, strictly increasing in rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTable {
    modes: Vec<TransmissionMode>,
}

#[derive(Debug, Deserialize)]
struct ModeRow {
    rate: f64,
    p: f64,
    q: f64,
    a: f64,
    b: f64,
    c: f64,
    k: f64,
}

impl ModeTable {
    pub fn new(modes: Vec<TransmissionMode>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidMode("mode table is empty".into()));
        }
        if modes.windows(2).any(|w| !(w[1].rate > w[0].rate)) {
            return Err(Error::InvalidMode("mode rates must be strictly increasing".into()));
        }
        Ok(Self { modes })
    }

    /// The six DVB-S2 LDPC modes (rates 0.5, 1, 1.5, 2, 3, 4).
    pub fn dvbs2() -> Self {
        static TABLE: OnceLock<ModeTable> = OnceLock::new();
        TABLE
            .get_or_init(|| Self::from_csv_reader(DVBS2_TABLE.as_bytes()).expect("built-in mode table is valid"))
            .clone()
    }

    /// Read a table with columns `rate,p,q,a,b,c,k`; `#` starts a comment line.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut modes = Vec::new();
        for (line, row) in rdr.deserialize::<ModeRow>().enumerate() {
            let row = row.map_err(|e| Error::Config(format!("mode table row {}: {e}", line + 1)))?;
            let fit = BerFit::new(row.p, row.q, row.a, row.b, row.c, row.k);
            modes.push(TransmissionMode::new(row.rate, fit)?);
        }
        Self::new(modes)
    }

    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Config(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(file)
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Mode `n`, 1-based.
    pub fn mode(&self, n: usize) -> &TransmissionMode {
        &self.modes[n - 1]
    }

    pub fn modes(&self) -> &[TransmissionMode] {
        &self.modes
    }

    pub fn rates(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.rate).collect()
    }

    /// Security and reliability thresholds of every mode.
    pub fn thresholds(&self, targets: &QosTargets) -> Result<ModeThresholds> {
        let mut gamma_r = Vec::with_capacity(self.len());
        let mut gamma_d = Vec::with_capacity(self.len());
        for mode in &self.modes {
            let (r, d) = thresholds(mode, targets)?;
            gamma_r.push(r);
            gamma_d.push(d);
        }
        Ok(ModeThresholds { gamma_r, gamma_d })
    }
}

/// BER floor at every relay and BER ceiling at the destination.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct QosTargets {
    pub ber_floor_relay: f64,
    pub ber_ceiling_dest: f64,
}

impl Default for QosTargets {
    fn default() -> Self {
        Self {
            ber_floor_relay: 0.1,
            ber_ceiling_dest: 1e-6,
        }
    }
}

impl QosTargets {
    pub fn new(ber_floor_relay: f64, ber_ceiling_dest: f64) -> Result<Self> {
        let t = Self { ber_floor_relay, ber_ceiling_dest };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.ber_ceiling_dest && self.ber_ceiling_dest < self.ber_floor_relay && self.ber_floor_relay < 0.5) {
            return Err(Error::InvalidTargets(format!(
                "need 0 < ceiling ({}) < floor ({}) < 0.5",
                self.ber_ceiling_dest, self.ber_floor_relay
            )));
        }
        Ok(())
    }
}

/// Per-mode SNR thresholds, index 0 is mode 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeThresholds {
    /// Largest relay SNR that still leaves the relay BER at or above the floor.
    pub gamma_r: Vec<f64>,
    /// Smallest destination SNR meeting the BER ceiling.
    pub gamma_d: Vec<f64>,
}

impl ModeThresholds {
    pub fn security(&self, n: usize) -> f64 {
        self.gamma_r[n - 1]
    }

    pub fn reliability(&self, n: usize) -> f64 {
        self.gamma_d[n - 1]
    }
}

/// `(Γ_r, Γ_d)` for one mode.
///
/// Both are the fit inverse at the targets, nudged by a few ulps so that
/// `iber(Γ_r) >= floor` and `iber(Γ_d) <= ceiling` hold exactly in floating
/// point; the constraint audits compare without tolerance.
pub fn thresholds(mode: &TransmissionMode, targets: &QosTargets) -> Result<(f64, f64)> {
    targets.validate()?;
    let mut gamma_r = mode.snr_for_ber(targets.ber_floor_relay)?;
    while mode.iber(gamma_r) < targets.ber_floor_relay && gamma_r > 0.0 {
        gamma_r = gamma_r.next_down();
    }
    let mut gamma_d = mode.snr_for_ber(targets.ber_ceiling_dest)?;
    while mode.iber(gamma_d) > targets.ber_ceiling_dest {
        gamma_d = gamma_d.next_up();
    }
    if !(gamma_r < gamma_d) {
        return Err(Error::InvalidTargets(format!(
            "security threshold {gamma_r} is not below reliability threshold {gamma_d}"
        )));
    }
    Ok((gamma_r, gamma_d))
}
