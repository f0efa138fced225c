//! Monte-Carlo sweeps with per-frame constraint audits.
//!
//! Frame `f` of every grid point and every scheme draws its fading from the
//! same stream `frame_rng(seed, f)`. Since the draws are unit exponentials
//! scaled by the means, the grid points and schemes see common random
//! numbers: comparisons between schemes and between neighbouring SNRs are
//! free of independent sampling noise. Counts are integers and are merged
//! in frame order, so the result does not depend on the number of workers.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::analysis::{spectral_efficiency, ModeDistribution};
use crate::channel::{frame_rng, sample_fading, AverageSnrProfile, FadingRealization};
use crate::combining::{equivalent_snr, Combining};
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::schemes::{decide, Scheme, SchemeConfig, SchemeDecision};

/// Frames handed to one rayon task.
const CHUNK: u64 = 512;

/// Constraint check of one decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AuditRecord {
    /// Some relay decodes with BER below the floor.
    pub security_violation: bool,
    /// The destination BER, on the exact MRC SNR, is above the ceiling.
    pub reliability_violation: bool,
}

impl AuditRecord {
    pub fn is_clean(&self) -> bool {
        !self.security_violation && !self.reliability_violation
    }
}

/// Check the security floor at every relay and the reliability ceiling at D.
/// The SNR at D is recomputed with exact AF combining whatever the decision
/// engine used; a decision that references a relay without power fails the
/// reliability check.
pub fn audit_frame(decision: &SchemeDecision, fading: &FadingRealization, config: &SchemeConfig) -> AuditRecord {
    let t = match decision {
        SchemeDecision::Outage => return AuditRecord::default(),
        SchemeDecision::Transmit(t) => t,
    };
    if t.mode == 0 || t.mode > config.modes.len() {
        return AuditRecord {
            security_violation: true,
            reliability_violation: true,
        };
    }
    let mode = config.modes.mode(t.mode);
    let floor = config.targets.ber_floor_relay;
    let security_violation = fading.gamma_s.iter().any(|&g| !(mode.iber(t.alloc.source * g) >= floor));
    let reliability_violation = match equivalent_snr(&t.alloc, fading, &t.coop, Combining::Exact) {
        Ok(g) => !(mode.iber(g) <= config.targets.ber_ceiling_dest),
        Err(_) => true,
    };
    AuditRecord {
        security_violation,
        reliability_violation,
    }
}

/// Tallies of one (scheme, cooperating-set size, SNR) point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub scheme: Scheme,
    pub n_coop: usize,
    pub gamma_sd_db: f64,
    /// Frames per mode, index 0 is outage.
    pub counts: Vec<u64>,
    pub frames: u64,
    pub eta: f64,
    /// Standard error of `eta` from the per-frame rate variance.
    pub eta_stderr: f64,
    pub security_violations: u64,
    pub reliability_violations: u64,
}

impl SweepPoint {
    pub fn distribution(&self) -> ModeDistribution {
        ModeDistribution::from_counts(&self.counts).expect("a point counts at least one frame")
    }

    pub fn p_outage(&self) -> f64 {
        self.counts[0] as f64 / self.frames as f64
    }

    pub fn violations(&self) -> u64 {
        self.security_violations + self.reliability_violations
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Ordered by grid point, then scheme, then cooperating-set size.
    pub points: Vec<SweepPoint>,
    /// Mean wall time per frame of each point. Not reproducible, and kept
    /// apart from `points` for that reason.
    pub time_per_frame: Vec<Duration>,
}

impl SweepResult {
    pub fn find(&self, scheme: Scheme, n_coop: usize, gamma_sd_db: f64) -> Option<&SweepPoint> {
        self.points
            .iter()
            .find(|p| p.scheme == scheme && p.n_coop == n_coop && p.gamma_sd_db == gamma_sd_db)
    }

    /// The points of one curve in grid order.
    pub fn curve(&self, scheme: Scheme, n_coop: usize) -> Vec<&SweepPoint> {
        self.points.iter().filter(|p| p.scheme == scheme && p.n_coop == n_coop).collect()
    }

    pub fn total_violations(&self) -> u64 {
        self.points.iter().map(SweepPoint::violations).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Tally {
    counts: Vec<u64>,
    security: u64,
    reliability: u64,
}

impl Tally {
    fn new(n_modes: usize) -> Self {
        Self {
            counts: vec![0; n_modes + 1],
            security: 0,
            reliability: 0,
        }
    }

    fn merge(mut self, other: &Tally) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.security += other.security;
        self.reliability += other.reliability;
        self
    }
}

fn run_chunk(profile: &AverageSnrProfile, config: &SchemeConfig, seed: u64, start: u64, end: u64) -> Result<Tally> {
    let mut tally = Tally::new(config.modes.len());
    for frame in start..end {
        let mut rng = frame_rng(seed, frame);
        let fading = sample_fading(profile, &mut rng);
        let decision = decide(&fading, config).map_err(|e| Error::Frame {
            frame,
            source: Box::new(e),
        })?;
        tally.counts[decision.mode_index()] += 1;
        let audit = audit_frame(&decision, &fading, config);
        tally.security += u64::from(audit.security_violation);
        tally.reliability += u64::from(audit.reliability_violation);
    }
    Ok(tally)
}

/// Run `frames` frames of one scheme at one profile.
pub fn simulate_point(profile: &AverageSnrProfile, config: &SchemeConfig, frames: u64, seed: u64) -> Result<(Vec<u64>, u64, u64)> {
    let n_chunks = frames.div_ceil(CHUNK);
    let tallies: Vec<Result<Tally>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| run_chunk(profile, config, seed, c * CHUNK, ((c + 1) * CHUNK).min(frames)))
        .collect();
    let mut total = Tally::new(config.modes.len());
    for t in tallies {
        total = total.merge(&t?);
    }
    Ok((total.counts, total.security, total.reliability))
}

/// `η` and its standard error from mode counts; the per-frame rate is
/// `R_n / 2`.
pub fn eta_with_stderr(counts: &[u64], rates: &[f64]) -> (f64, f64) {
    let frames: u64 = counts.iter().sum();
    let n = frames as f64;
    let (mut s1, mut s2) = (0.0, 0.0);
    for (&c, &r) in counts[1..].iter().zip(rates) {
        let v = 0.5 * r;
        s1 += c as f64 * v;
        s2 += c as f64 * v * v;
    }
    let mean = s1 / n;
    if frames < 2 {
        return (mean, f64::INFINITY);
    }
    let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
    (mean, (var / n).sqrt())
}

fn sweep_inner(config: &ExperimentConfig) -> Result<SweepResult> {
    let rates = config.modes.rates();
    let mut points = Vec::new();
    let mut time_per_frame = Vec::new();
    for &db in &config.grid_db {
        let profile = config.profile_at(db)?;
        for &scheme in &config.schemes {
            for &n_coop in &config.n_coop {
                let sc = config.scheme_config(scheme, n_coop, &profile)?;
                let started = Instant::now();
                let (counts, security, reliability) = simulate_point(&profile, &sc, config.frames, config.seed)?;
                time_per_frame.push(started.elapsed() / config.frames.min(u32::MAX as u64) as u32);
                let (eta, eta_stderr) = eta_with_stderr(&counts, &rates);
                debug_assert!((eta - spectral_efficiency(&ModeDistribution::from_counts(&counts)?, &config.modes)?).abs() < 1e-12);
                points.push(SweepPoint {
                    scheme,
                    n_coop,
                    gamma_sd_db: db,
                    counts,
                    frames: config.frames,
                    eta,
                    eta_stderr,
                    security_violations: security,
                    reliability_violations: reliability,
                });
            }
        }
    }
    Ok(SweepResult { points, time_per_frame })
}

/// Simulate every (grid point, scheme, cooperating-set size) of `config`.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    match config.workers {
        None => sweep_inner(config),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| sweep_inner(config)),
    }
}
