//! Experiment configuration, read from TOML. SNRs are in dB here and linear
//! everywhere else.
//!
//! ```toml
//! seed = 7
//! frames = 100000
//! schemes = ["LAURA1", "LAURA2-CPR"]
//! n_coop = [1, 3]
//! combining = "exact"        # or "upper_bound"
//!
//! [geometry]
//! n_relays = 5
//! ell_s1 = 0.9
//!
//! [sweep]
//! start_db = 0.0
//! stop_db = 30.0
//! step_db = 2.0
//! ```
//!
//! Instead of `[geometry]`, a `[profile]` table gives the relay links as dB
//! offsets from the S–D mean: `gain_s_db = [...]`, `gain_d_db = [...]`.

use std::path::Path;

use serde::Deserialize;

use crate::channel::{db_to_linear, profile_from_geometry, AverageSnrProfile, NetworkGeometry};
use crate::combining::{Combining, PowerBudget};
use crate::error::{Error, Result};
use crate::modes::{ModeTable, QosTargets};
use crate::schemes::{Scheme, SchemeConfig};

/// Where the average SNRs come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Network {
    Geometry(NetworkGeometry),
    /// Relay means as fixed multiples of the S–D mean.
    Gains { gain_s: Vec<f64>, gain_d: Vec<f64> },
}

impl Network {
    pub fn n_relays(&self) -> usize {
        match self {
            Network::Geometry(g) => g.n_relays,
            Network::Gains { gain_s, .. } => gain_s.len(),
        }
    }

    /// Profile at S–D mean SNR `mean_sd` (linear).
    pub fn profile(&self, mean_sd: f64) -> Result<AverageSnrProfile> {
        match self {
            Network::Geometry(g) => profile_from_geometry(g, mean_sd),
            Network::Gains { gain_s, gain_d } => AverageSnrProfile::from_gains(mean_sd, gain_s, gain_d),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub network: Network,
    pub schemes: Vec<Scheme>,
    pub n_coop: Vec<usize>,
    /// S–D mean SNRs of the sweep, in dB.
    pub grid_db: Vec<f64>,
    pub frames: u64,
    pub seed: u64,
    pub combining: Combining,
    pub targets: QosTargets,
    /// Sum power in units of `S`; `None` means `(N_R + 1)`.
    pub budget_total: Option<f64>,
    pub modes: ModeTable,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

/// Default sweep: 0 to 30 dB in 2 dB steps.
pub fn default_grid_db() -> Vec<f64> {
    (0..=15).map(|k| 2.0 * k as f64).collect()
}

impl ExperimentConfig {
    /// Defaults: five relays on the line at `ell_s1 = 0.9`,
    /// LAURA1 with one cooperating relay, the default grid.
    pub fn new(network: Network) -> Self {
        Self {
            network,
            schemes: vec![Scheme::Laura1],
            n_coop: vec![1],
            grid_db: default_grid_db(),
            frames: 10_000,
            seed: 1,
            combining: Combining::Exact,
            targets: QosTargets::default(),
            budget_total: None,
            modes: ModeTable::dvbs2(),
            workers: None,
        }
    }

    pub fn n_relays(&self) -> usize {
        self.network.n_relays()
    }

    pub fn budget(&self) -> Result<PowerBudget> {
        match self.budget_total {
            Some(t) => PowerBudget::new(t),
            None => Ok(PowerBudget::for_relays(self.n_relays())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Network::Geometry(g) = &self.network {
            g.validate()?;
        }
        if let Network::Gains { gain_s, gain_d } = &self.network {
            if gain_s.is_empty() || gain_s.len() != gain_d.len() {
                return Err(Error::Config("gain_s_db and gain_d_db must be nonempty and of equal length".into()));
            }
        }
        if self.frames == 0 {
            return Err(Error::Config("frames must be at least 1".into()));
        }
        if self.grid_db.is_empty() || self.grid_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("the sweep grid must be nonempty and finite".into()));
        }
        if self.schemes.is_empty() || self.n_coop.is_empty() {
            return Err(Error::Config("at least one scheme and one n_coop value are required".into()));
        }
        let n = self.n_relays();
        if let Some(&bad) = self.n_coop.iter().find(|&&c| c == 0 || c > n) {
            return Err(Error::Config(format!("n_coop = {bad} outside 1..={n}")));
        }
        self.targets.validate()?;
        let budget = self.budget()?;
        if !(budget.total > 0.0) {
            return Err(Error::Config("budget total must be positive".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    /// Decision configuration for one scheme, cooperating-set size and profile.
    pub fn scheme_config(&self, scheme: Scheme, n_coop: usize, profile: &AverageSnrProfile) -> Result<SchemeConfig> {
        Ok(SchemeConfig::new(scheme, self.n_relays(), n_coop, self.modes.clone(), self.targets, self.budget()?)?
            .with_combining(self.combining)
            .with_mean_source_snr(&profile.mean_s))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        file.into_config(None)
    }

    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let file: ConfigFile = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        file.into_config(path.parent())
    }

    /// Profile at grid point `db`.
    pub fn profile_at(&self, db: f64) -> Result<AverageSnrProfile> {
        self.network.profile(db_to_linear(db))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    seed: Option<u64>,
    frames: Option<u64>,
    schemes: Option<Vec<Scheme>>,
    n_coop: Option<Vec<usize>>,
    combining: Option<Combining>,
    workers: Option<usize>,
    /// CSV mode table, relative to the config file.
    modes_csv: Option<String>,
    geometry: Option<GeometryFile>,
    profile: Option<ProfileFile>,
    sweep: Option<SweepFile>,
    targets: Option<QosTargets>,
    budget: Option<BudgetFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryFile {
    n_relays: Option<usize>,
    ell_s1: f64,
    relay_spacing: Option<f64>,
    path_loss_exponent: Option<f64>,
    positions: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    gain_s_db: Vec<f64>,
    gain_d_db: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    start_db: Option<f64>,
    stop_db: Option<f64>,
    step_db: Option<f64>,
    points_db: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BudgetFile {
    total: f64,
}

impl SweepFile {
    fn grid(&self) -> Result<Vec<f64>> {
        if let Some(p) = &self.points_db {
            if self.start_db.is_some() || self.stop_db.is_some() || self.step_db.is_some() {
                return Err(Error::Config("give either points_db or start/stop/step, not both".into()));
            }
            return Ok(p.clone());
        }
        let start = self.start_db.unwrap_or(0.0);
        let stop = self.stop_db.unwrap_or(30.0);
        let step = self.step_db.unwrap_or(2.0);
        if !(step > 0.0) || !(stop >= start) {
            return Err(Error::Config(format!("bad sweep range {start}..{stop} step {step}")));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| start + step * k as f64).collect())
    }
}

impl ConfigFile {
    fn into_config(self, base: Option<&Path>) -> Result<ExperimentConfig> {
        let network = match (self.geometry, self.profile) {
            (Some(_), Some(_)) => return Err(Error::Config("give either [geometry] or [profile], not both".into())),
            (None, Some(p)) => Network::Gains {
                gain_s: p.gain_s_db.iter().map(|&d| db_to_linear(d)).collect(),
                gain_d: p.gain_d_db.iter().map(|&d| db_to_linear(d)).collect(),
            },
            (Some(g), None) => {
                let mut geo = NetworkGeometry::new(g.n_relays.unwrap_or(5), g.ell_s1);
                if let Some(s) = g.relay_spacing {
                    geo = geo.with_spacing(s);
                }
                if let Some(a) = g.path_loss_exponent {
                    geo = geo.with_path_loss_exponent(a);
                }
                if let Some(p) = g.positions {
                    if g.n_relays.is_some_and(|n| n != p.len()) {
                        return Err(Error::Config("n_relays disagrees with the number of positions".into()));
                    }
                    geo = geo.with_positions(p);
                }
                Network::Geometry(geo)
            }
            (None, None) => Network::Geometry(NetworkGeometry::new(5, 0.9)),
        };
        let mut config = ExperimentConfig::new(network);
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = self.frames {
            config.frames = v;
        }
        if let Some(v) = self.schemes {
            config.schemes = v;
        }
        if let Some(v) = self.n_coop {
            config.n_coop = v;
        }
        if let Some(v) = self.combining {
            config.combining = v;
        }
        config.workers = self.workers;
        if let Some(s) = self.sweep {
            config.grid_db = s.grid()?;
        }
        if let Some(t) = self.targets {
            config.targets = t;
        }
        config.budget_total = self.budget.map(|b| b.total);
        if let Some(csv) = self.modes_csv {
            let path = match base {
                Some(b) => b.join(&csv),
                None => csv.into(),
            };
            config.modes = ModeTable::from_path(&path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        }
        config.validate().map_err(|e| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        })?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_uses_defaults() {
        let c = ExperimentConfig::from_toml_str("").unwrap();
        assert_eq!(c.n_relays(), 5);
        assert_eq!(c.grid_db.len(), 16);
        assert_eq!(c.grid_db[15], 30.0);
        assert_eq!(c.budget().unwrap().total, 6.0);
        assert_eq!(c.combining, Combining::Exact);
    }

    #[test]
    fn full_file() {
        let c = ExperimentConfig::from_toml_str(
            r#"
            seed = 9
            frames = 500
            schemes = ["laura1", "LAURA2_CPR"]
            n_coop = [1, 2]
            combining = "upper_bound"
            [geometry]
            n_relays = 3
            ell_s1 = 0.5
            [sweep]
            points_db = [5.0, 15.0]
            [targets]
            ber_floor_relay = 0.2
            ber_ceiling_dest = 1e-5
            [budget]
            total = 10.0
            "#,
        )
        .unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.schemes, vec![Scheme::Laura1, Scheme::Laura2Cpr]);
        assert_eq!(c.combining, Combining::UpperBound);
        assert_eq!(c.grid_db, vec![5.0, 15.0]);
        assert_eq!(c.targets.ber_floor_relay, 0.2);
        assert_eq!(c.budget().unwrap().total, 10.0);
        let p = c.profile_at(10.0).unwrap();
        assert!((p.mean_sd - 10.0).abs() < 1e-12);
        assert_eq!(p.n_relays(), 3);
    }

    #[test]
    fn profile_gains_in_db() {
        let c = ExperimentConfig::from_toml_str(
            r#"
            [profile]
            gain_s_db = [10.0, 0.0]
            gain_d_db = [3.0, -3.0]
            "#,
        )
        .unwrap();
        let p = c.profile_at(0.0).unwrap();
        assert!((p.mean_s[0] - 10.0).abs() < 1e-12);
        assert_eq!(c.budget().unwrap().total, 3.0);
    }

    #[test]
    fn rejects_bad_files() {
        for text in [
            "frames = 0",
            "n_coop = [6]",
            "schemes = [\"LAURA9\"]",
            "bogus = 1",
            "[sweep]\npoints_db = []",
            "[sweep]\nstep_db = -1.0",
            "[geometry]\nell_s1 = 0.0",
            "[targets]\nber_floor_relay = 0.6\nber_ceiling_dest = 1e-6",
            "[geometry]\nell_s1 = 0.9\n[profile]\ngain_s_db = [0.0]\ngain_d_db = [0.0]",
        ] {
            assert!(matches!(ExperimentConfig::from_toml_str(text), Err(Error::Config(_))), "{text}");
        }
    }
}
