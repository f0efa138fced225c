//! Network geometry, path-loss average SNRs and Rayleigh-fading draws.
//!
//! S sits at the origin and D at `(1, 0)`. Relay 1 is on the S–D axis at
//! distance `ell_s1` from S; relay `i` is `relay_spacing * (i - 1)` above it
//! on the perpendicular through relay 1. Every link's average SNR is
//! `mean_sd / ℓ^α`, with the unit S–D distance as the reference.
//!
//! All SNRs are linear power ratios.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGeometry {
    pub n_relays: usize,
    pub ell_s1: f64,
    pub relay_spacing: f64,
    pub path_loss_exponent: f64,
    /// Explicit relay coordinates; when set they replace the line layout.
    pub positions: Option<Vec<(f64, f64)>>,
}

impl NetworkGeometry {
    /// Line layout with the default spacing 0.1 and path-loss exponent 4.
    pub fn new(n_relays: usize, ell_s1: f64) -> Self {
        Self {
            n_relays,
            ell_s1,
            relay_spacing: 0.1,
            path_loss_exponent: 4.0,
            positions: None,
        }
    }

    pub fn with_spacing(mut self, relay_spacing: f64) -> Self {
        self.relay_spacing = relay_spacing;
        self
    }

    pub fn with_path_loss_exponent(mut self, alpha: f64) -> Self {
        self.path_loss_exponent = alpha;
        self
    }

    pub fn with_positions(mut self, positions: Vec<(f64, f64)>) -> Self {
        self.n_relays = positions.len();
        self.positions = Some(positions);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_relays == 0 {
            return Err(Error::InvalidGeometry("at least one relay is required".into()));
        }
        if !(self.path_loss_exponent > 0.0 && self.path_loss_exponent.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "path-loss exponent must be positive, got {}",
                self.path_loss_exponent
            )));
        }
        match &self.positions {
            Some(p) if p.len() != self.n_relays => Err(Error::InvalidGeometry(format!(
                "{} positions for {} relays",
                p.len(),
                self.n_relays
            ))),
            Some(p) if p.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) => {
                Err(Error::InvalidGeometry("relay coordinates must be finite".into()))
            }
            Some(_) => Ok(()),
            None => {
                if !(self.ell_s1 > 0.0 && self.ell_s1 < 1.0) {
                    return Err(Error::InvalidGeometry(format!("ell_s1 must lie in (0, 1), got {}", self.ell_s1)));
                }
                if !(self.relay_spacing > 0.0 && self.relay_spacing.is_finite()) {
                    return Err(Error::InvalidGeometry(format!(
                        "relay spacing must be positive, got {}",
                        self.relay_spacing
                    )));
                }
                Ok(())
            }
        }
    }

    /// Relay coordinates, relay 1 first.
    pub fn relay_positions(&self) -> Vec<(f64, f64)> {
        match &self.positions {
            Some(p) => p.clone(),
            None => (0..self.n_relays)
                .map(|i| (self.ell_s1, self.relay_spacing * i as f64))
                .collect(),
        }
    }
}

/// Mean SNRs of the S–D, S–relay and relay–D links.
#[derive(Debug, Clone, PartialEq)]
pub struct AverageSnrProfile {
    pub mean_sd: f64,
    pub mean_s: Vec<f64>,
    pub mean_d: Vec<f64>,
}

impl AverageSnrProfile {
    pub fn new(mean_sd: f64, mean_s: Vec<f64>, mean_d: Vec<f64>) -> Result<Self> {
        let profile = Self { mean_sd, mean_s, mean_d };
        profile.validate()?;
        Ok(profile)
    }

    /// Profile whose relay links are fixed multiples (`gain_s`, `gain_d`) of `mean_sd`.
    pub fn from_gains(mean_sd: f64, gain_s: &[f64], gain_d: &[f64]) -> Result<Self> {
        Self::new(
            mean_sd,
            gain_s.iter().map(|g| g * mean_sd).collect(),
            gain_d.iter().map(|g| g * mean_sd).collect(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.mean_s.is_empty() || self.mean_s.len() != self.mean_d.len() {
            return Err(Error::InvalidProfile(format!(
                "relay vectors have lengths {} and {}",
                self.mean_s.len(),
                self.mean_d.len()
            )));
        }
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(self.mean_sd) || !self.mean_s.iter().chain(&self.mean_d).all(|&v| ok(v)) {
            return Err(Error::InvalidProfile("mean SNRs must be positive and finite".into()));
        }
        Ok(())
    }

    pub fn n_relays(&self) -> usize {
        self.mean_s.len()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            mean_sd: self.mean_sd * factor,
            mean_s: self.mean_s.iter().map(|m| m * factor).collect(),
            mean_d: self.mean_d.iter().map(|m| m * factor).collect(),
        }
    }
}

/// Average SNR profile for a geometry at S–D mean SNR `mean_sd`.
pub fn profile_from_geometry(geometry: &NetworkGeometry, mean_sd: f64) -> Result<AverageSnrProfile> {
    geometry.validate()?;
    if !(mean_sd > 0.0 && mean_sd.is_finite()) {
        return Err(Error::InvalidProfile(format!("mean_sd must be positive, got {mean_sd}")));
    }
    let alpha = geometry.path_loss_exponent;
    let mut mean_s = Vec::with_capacity(geometry.n_relays);
    let mut mean_d = Vec::with_capacity(geometry.n_relays);
    for (i, (x, y)) in geometry.relay_positions().into_iter().enumerate() {
        let l_s = x.hypot(y);
        let l_d = (1.0 - x).hypot(y);
        if l_s == 0.0 || l_d == 0.0 {
            return Err(Error::InvalidGeometry(format!("relay {} coincides with S or D", i + 1)));
        }
        mean_s.push(mean_sd / l_s.powf(alpha));
        mean_d.push(mean_sd / l_d.powf(alpha));
    }
    AverageSnrProfile::new(mean_sd, mean_s, mean_d)
}

/// One frame's instantaneous SNRs.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingRealization {
    pub gamma_sd: f64,
    pub gamma_s: Vec<f64>,
    pub gamma_d: Vec<f64>,
}

impl FadingRealization {
    pub fn new(gamma_sd: f64, gamma_s: Vec<f64>, gamma_d: Vec<f64>) -> Result<Self> {
        if gamma_s.len() != gamma_d.len() || gamma_s.is_empty() {
            return Err(Error::InvalidArgument("fading vectors must be nonempty and of equal length".into()));
        }
        let ok = |v: f64| v >= 0.0 && v.is_finite();
        if !ok(gamma_sd) || !gamma_s.iter().chain(&gamma_d).all(|&v| ok(v)) {
            return Err(Error::InvalidArgument("instantaneous SNRs must be finite and nonnegative".into()));
        }
        Ok(Self { gamma_sd, gamma_s, gamma_d })
    }

    pub fn n_relays(&self) -> usize {
        self.gamma_s.len()
    }

    /// Largest source–relay SNR over all relays (ties: lowest index).
    pub fn strongest_source_relay(&self) -> (usize, f64) {
        self.gamma_s
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, g)| if g > best.1 { (i, g) } else { best })
    }
}

/// Draw one frame: independent exponential SNRs with the profile's means.
/// Draw order is S–D, then S–relay 1..N, then relay–D 1..N.
pub fn sample_fading<R: Rng + ?Sized>(profile: &AverageSnrProfile, rng: &mut R) -> FadingRealization {
    let mut draw = |mean: f64| -> f64 {
        let e: f64 = Exp1.sample(rng);
        e * mean
    };
    let gamma_sd = draw(profile.mean_sd);
    let gamma_s = profile.mean_s.iter().map(|&m| draw(m)).collect();
    let gamma_d = profile.mean_d.iter().map(|&m| draw(m)).collect();
    FadingRealization { gamma_sd, gamma_s, gamma_d }
}

/// Independent random stream for one frame, derived from the master seed.
pub fn frame_rng(master_seed: u64, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(frame);
    rng
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
