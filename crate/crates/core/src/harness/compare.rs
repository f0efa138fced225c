//! Analytical sweeps and their comparison with Monte Carlo.

use crate::analysis::{
    spectral_efficiency, tm_probs_constant_power, tm_probs_laura3_cpr, tm_probs_single_relay_adaptive, AnalysisOptions,
    ModeDistribution,
};
use crate::combining::Combining;
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::sweep::{eta_with_stderr, simulate_point};
use crate::schemes::Scheme;

/// Which analysis covers a scheme, and the SNR model it assumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalysisKind {
    /// Constant power, one cooperating relay, weaker-hop SNR.
    ConstantPower,
    /// Optimized power, one cooperating relay, exact AF SNR.
    SingleRelayAdaptive,
    /// Constant-power relays fixed by mean SNR, weaker-hop SNR.
    Cpr,
}

impl AnalysisKind {
    /// Combining the matching simulation should use.
    pub fn combining(self) -> Combining {
        match self {
            AnalysisKind::SingleRelayAdaptive => Combining::Exact,
            AnalysisKind::ConstantPower | AnalysisKind::Cpr => Combining::UpperBound,
        }
    }
}

/// The analysis covering `scheme` with `n_coop` of `n_relays` cooperating.
///
/// LAURA2 with one relay is LAURA1 only when there is a single relay. The
/// three CPR rules pick the same set when every relay cooperates, so
/// LAURA3-CPR's analysis covers all of them there.
pub fn analysis_kind(scheme: Scheme, n_relays: usize, n_coop: usize) -> Result<AnalysisKind> {
    let kind = match scheme {
        Scheme::Laura1Cp if n_coop == 1 => Some(AnalysisKind::ConstantPower),
        Scheme::Laura1 if n_coop == 1 => Some(AnalysisKind::SingleRelayAdaptive),
        Scheme::Laura2 if n_coop == 1 && n_relays == 1 => Some(AnalysisKind::SingleRelayAdaptive),
        Scheme::Laura3Cpr => Some(AnalysisKind::Cpr),
        Scheme::Laura1Cpr | Scheme::Laura2Cpr if n_coop == n_relays => Some(AnalysisKind::Cpr),
        _ => None,
    };
    kind.ok_or_else(|| Error::UnsupportedAnalysis(format!("{scheme} with N_C = {n_coop} of N_R = {n_relays}")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisRow {
    pub scheme: Scheme,
    pub n_coop: usize,
    pub gamma_sd_db: f64,
    pub distribution: ModeDistribution,
    pub eta: f64,
}

fn analyze_point(config: &ExperimentConfig, kind: AnalysisKind, n_coop: usize, db: f64, options: &AnalysisOptions) -> Result<ModeDistribution> {
    let profile = config.profile_at(db)?;
    let budget = config.budget()?;
    match kind {
        AnalysisKind::ConstantPower => tm_probs_constant_power(&profile, &config.modes, &config.targets, options),
        AnalysisKind::SingleRelayAdaptive => {
            tm_probs_single_relay_adaptive(&profile, &config.modes, &config.targets, &budget, options)
        }
        AnalysisKind::Cpr => tm_probs_laura3_cpr(&profile, &config.modes, &config.targets, &budget, n_coop, options),
    }
}

/// Analytical mode distribution and `η` for every covered point of `config`.
/// Any uncovered (scheme, `N_C`) pair is an error, before any work is done.
pub fn analyze(config: &ExperimentConfig, options: &AnalysisOptions) -> Result<Vec<AnalysisRow>> {
    config.validate()?;
    let n_relays = config.n_relays();
    let mut jobs = Vec::new();
    for &db in &config.grid_db {
        for &scheme in &config.schemes {
            for &n_coop in &config.n_coop {
                jobs.push((scheme, n_coop, db, analysis_kind(scheme, n_relays, n_coop)?));
            }
        }
    }
    jobs.into_iter()
        .map(|(scheme, n_coop, db, kind)| {
            let distribution = analyze_point(config, kind, n_coop, db, options)?;
            let eta = spectral_efficiency(&distribution, &config.modes)?;
            Ok(AnalysisRow {
                scheme,
                n_coop,
                gamma_sd_db: db,
                distribution,
                eta,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub scheme: Scheme,
    pub n_coop: usize,
    pub gamma_sd_db: f64,
    /// Combining used by the simulation.
    pub combining: Combining,
    pub eta_sim: f64,
    pub eta_sim_stderr: f64,
    pub eta_analytical: f64,
    /// `(η_analytical − η_sim) / η_sim`.
    pub relative_gap: f64,
}

impl ComparisonRow {
    /// Gap in units of the simulation's standard error.
    pub fn z_score(&self) -> f64 {
        (self.eta_analytical - self.eta_sim) / self.eta_sim_stderr
    }
}

/// Run the analysis and a like-for-like simulation at every point. The
/// simulation uses the SNR model of the analysis (see
/// [`AnalysisKind::combining`]), overriding `config.combining`.
pub fn compare_analysis(config: &ExperimentConfig, options: &AnalysisOptions) -> Result<Vec<ComparisonRow>> {
    let analytical = analyze(config, options)?;
    let rates = config.modes.rates();
    let n_relays = config.n_relays();
    let run = || {
        analytical
            .iter()
            .map(|row| {
                let combining = analysis_kind(row.scheme, n_relays, row.n_coop)?.combining();
                let profile = config.profile_at(row.gamma_sd_db)?;
                let sc = config.scheme_config(row.scheme, row.n_coop, &profile)?.with_combining(combining);
                let (counts, _, _) = simulate_point(&profile, &sc, config.frames, config.seed)?;
                let (eta_sim, eta_sim_stderr) = eta_with_stderr(&counts, &rates);
                Ok(ComparisonRow {
                    scheme: row.scheme,
                    n_coop: row.n_coop,
                    gamma_sd_db: row.gamma_sd_db,
                    combining,
                    eta_sim,
                    eta_sim_stderr,
                    eta_analytical: row.eta,
                    relative_gap: (row.eta - eta_sim) / eta_sim,
                })
            })
            .collect()
    };
    match config.workers {
        None => run(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run),
    }
}
