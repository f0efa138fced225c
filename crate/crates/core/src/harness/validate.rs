//! Oracle suites for the numerical kernels. Each check reports its worst
//! error against a tolerance.

use rand::Rng;
use rayon::prelude::*;

use crate::analysis::MaxSnrStats;
use crate::channel::{frame_rng, FadingRealization};
use crate::combining::{equivalent_snr, Combining, PowerAllocation, PowerBudget};
use crate::error::Result;
use crate::modes::ModeTable;
use crate::numeric::{integrate, EulerInverter, QuadratureOptions};
use crate::power::{grid_oracle, kkt_residual, optimize_power_single_relay, solve_power, SecurityClamp};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    /// Worst error observed.
    pub worst: f64,
    pub tolerance: f64,
    /// How many cases the worst is taken over.
    pub cases: usize,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

#[derive(Debug, Clone)]
pub struct ValidationOptions {
    /// Random realizations per cooperating-set size in the power suite.
    pub samples: usize,
    pub seed: u64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self { samples: 1000, seed: 1 }
    }
}

/// Relative error of `iber(snr_for_ber(pe))` for every mode.
pub fn fit_roundtrip(table: &ModeTable) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for pe in [0.1, 1e-3, 1e-6] {
        let mut worst = 0.0f64;
        for mode in table.modes() {
            let g = mode.snr_for_ber(pe)?;
            worst = worst.max((mode.iber(g) - pe).abs() / pe);
        }
        out.push(Check {
            suite: "fit",
            name: format!("round trip at pe = {pe:e}"),
            worst,
            tolerance: 1e-9,
            cases: table.len(),
        });
    }
    Ok(out)
}

/// Mass of the max-SNR density and of each conditional law.
pub fn pdf_normalization() -> Result<Vec<Check>> {
    let tight = QuadratureOptions::default().with_rel_tol(1e-12).with_abs_tol(1e-15);
    let sets = [
        vec![1.0],
        vec![1.0, 1.0],
        vec![0.3, 2.0, 7.0],
        // Five relays on the line at 0.9, 10 dB.
        vec![15.24, 14.87, 13.87, 12.43, 10.74],
    ];
    let (mut worst_max, mut worst_cond) = (0.0f64, 0.0f64);
    let mut cases = 0;
    for means in sets {
        let stats = MaxSnrStats::new(means)?;
        let cut = stats.quantile_cut(1e-16);
        let mass = integrate(|x| stats.c(x), 0.0, cut, tight)?.value;
        worst_max = worst_max.max((mass - 1.0).abs());
        for i in 0..stats.n_relays() {
            for x in [0.01, 0.5, 3.0, 20.0] {
                let cond = stats.conditional(i, x);
                let cont = integrate(|y| cond.density(y), 0.0, x, tight)?.value;
                worst_cond = worst_cond.max((cont + cond.atom - 1.0).abs());
                cases += 1;
            }
        }
    }
    Ok(vec![
        Check {
            suite: "pdf",
            name: "max source-relay SNR density".into(),
            worst: worst_max,
            tolerance: 1e-8,
            cases: 4,
        },
        Check {
            suite: "pdf",
            name: "conditional source-relay SNR law".into(),
            worst: worst_cond,
            tolerance: 1e-8,
            cases,
        },
    ])
}

/// Euler inversion of transforms with known originals.
pub fn laplace_known_pairs(inverter: &EulerInverter) -> Vec<Check> {
    let mut worst_cdf = 0.0f64;
    let mut n_cdf = 0;
    for c in [0.1, 1.0, 7.0, 300.0] {
        for z in [1e-3, 0.05, 0.5, 1.0, 3.0, 10.0, 100.0, 1000.0] {
            let got = inverter.cdf_from_mgf(|s| 1.0 / (1.0 + s * c), z);
            worst_cdf = worst_cdf.max((got - (1.0 - (-z / c).exp())).abs());
            n_cdf += 1;
        }
    }
    // Sum of two exponentials: hypoexponential CDF.
    let (a, b) = (0.7, 2.5);
    for z in [0.1, 1.0, 4.0, 20.0] {
        let got = inverter.cdf_from_mgf(|s| 1.0 / ((1.0 + s * a) * (1.0 + s * b)), z);
        let want = 1.0 - (b * (-z / b).exp() - a * (-z / a).exp()) / (b - a);
        worst_cdf = worst_cdf.max((got - want).abs());
        n_cdf += 1;
    }
    let mut worst_pdf = 0.0f64;
    for t in [0.2, 1.0, 4.0] {
        let got = inverter.invert(|s| 1.0 / ((s + 1.0) * (s + 1.0)), t);
        worst_pdf = worst_pdf.max((got - t * (-t).exp()).abs());
    }
    vec![
        Check {
            suite: "laplace",
            name: "exponential and hypoexponential CDFs".into(),
            worst: worst_cdf,
            tolerance: 1e-8,
            cases: n_cdf,
        },
        Check {
            suite: "laplace",
            name: "Erlang density".into(),
            worst: worst_pdf,
            tolerance: 1e-8,
            cases: 3,
        },
    ]
}

/// Exponential SNRs with log-uniform means in [0.1, 100].
pub fn random_fading<R: Rng + ?Sized>(rng: &mut R, n_relays: usize) -> FadingRealization {
    let mut draw = || -(1.0 - rng.random::<f64>()).ln() * 10f64.powf(rng.random_range(-1.0..2.0));
    let sd = draw();
    let s = (0..n_relays).map(|_| draw()).collect();
    let d = (0..n_relays).map(|_| draw()).collect();
    FadingRealization::new(sd, s, d).expect("draws are finite and nonnegative")
}

/// Half of the samples are unclamped, half clamped at a random `Γ_r`.
fn random_clamp<R: Rng + ?Sized>(rng: &mut R, fading: &FadingRealization) -> SecurityClamp {
    if rng.random::<bool>() {
        SecurityClamp::unbounded()
    } else {
        SecurityClamp::new(rng.random_range(0.5..5.0), fading.strongest_source_relay().1)
    }
}

fn gamma_eq(alloc: &PowerAllocation, fading: &FadingRealization, coop: &[usize]) -> Result<f64> {
    equivalent_snr(alloc, fading, coop, Combining::Exact)
}

/// Grid resolution that keeps the oracle affordable.
fn oracle_resolution(n_coop: usize) -> usize {
    match n_coop {
        1 => 2000,
        2 => 200,
        _ => 60,
    }
}

struct PowerSample {
    /// `|γ_solver − γ_oracle| / γ_solver`.
    oracle_gap: f64,
    /// `γ_oracle > γ_solver` beyond rounding.
    oracle_better: bool,
    kkt: Option<f64>,
    closed_form_gap: Option<f64>,
}

fn power_sample(n_coop: usize, seed: u64, k: u64) -> Result<PowerSample> {
    let mut rng = frame_rng(seed ^ ((n_coop as u64) << 32), k);
    let fading = random_fading(&mut rng, n_coop);
    let clamp = random_clamp(&mut rng, &fading);
    let budget = PowerBudget::for_relays(n_coop);
    let coop: Vec<usize> = (0..n_coop).collect();
    let sol = solve_power(&coop, &fading, clamp, &budget)?;
    let g = gamma_eq(&sol.alloc, &fading, &coop)?;
    let oracle = grid_oracle(&coop, &fading, clamp, &budget, oracle_resolution(n_coop))?;
    let o = gamma_eq(&oracle, &fading, &coop)?;
    let scale = g.max(f64::MIN_POSITIVE);
    let kkt = (!sol.clamped && sol.is_interior(&budget)).then(|| kkt_residual(&coop, &fading, &sol));
    let closed_form_gap = if n_coop == 1 {
        let c = gamma_eq(&optimize_power_single_relay(0, &fading, clamp, &budget)?, &fading, &coop)?;
        Some((c - g).abs() / scale.max(c))
    } else {
        None
    };
    Ok(PowerSample {
        oracle_gap: (g - o).abs() / scale,
        oracle_better: o > g * (1.0 + 1e-12),
        kkt,
        closed_form_gap,
    })
}

/// The general solver against the grid oracle for `N_C ∈ {1, 2, 3}`, the
/// single-relay closed form against the solver, and the KKT residual at
/// every interior unclamped optimum.
pub fn power_oracle(options: &ValidationOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let (mut worst_kkt, mut n_kkt) = (0.0f64, 0);
    for n_coop in 1..=3 {
        let samples: Vec<PowerSample> = (0..options.samples as u64)
            .into_par_iter()
            .map(|k| power_sample(n_coop, options.seed, k))
            .collect::<Result<_>>()?;
        let worst = samples.iter().map(|s| s.oracle_gap).fold(0.0, f64::max);
        let better = samples.iter().filter(|s| s.oracle_better).count();
        out.push(Check {
            suite: "power",
            name: format!("solver vs grid oracle, N_C = {n_coop} ({better} oracle wins)"),
            worst,
            tolerance: 1e-6,
            cases: samples.len(),
        });
        for s in &samples {
            if let Some(r) = s.kkt {
                worst_kkt = worst_kkt.max(r);
                n_kkt += 1;
            }
        }
        if n_coop == 1 {
            out.push(Check {
                suite: "power",
                name: "single-relay closed form vs solver".into(),
                worst: samples.iter().filter_map(|s| s.closed_form_gap).fold(0.0, f64::max),
                tolerance: 1e-8,
                cases: samples.len(),
            });
        }
    }
    out.push(Check {
        suite: "power",
        name: "KKT residual at interior optima".into(),
        worst: worst_kkt,
        tolerance: 1e-8,
        cases: n_kkt,
    });
    Ok(out)
}

/// Every suite.
pub fn validate_all(table: &ModeTable, options: &ValidationOptions) -> Result<Vec<Check>> {
    let mut out = fit_roundtrip(table)?;
    out.extend(pdf_normalization()?);
    out.extend(laplace_known_pairs(&EulerInverter::default()));
    out.extend(power_oracle(options)?);
    Ok(out)
}
