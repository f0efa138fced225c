//! Per-frame power allocation: maximize the MRC equivalent SNR subject to
//! the security clamp on the source power and the network sum-power budget.
//!
//! For a fixed source power `Ss` the relay powers follow the stationarity
//! condition
//!
//! ```text
//! S_i = [ sqrt(γ_id·A_i·(A_i+1)) / ν − (A_i + 1) ]⁺ / γ_id,   A_i = Ss·γ_si
//! ```
//!
//! and `ν` is fixed by the sum-power budget. That inner problem is a
//! water-filling with a closed-form level once the active set is known, so it
//! is solved exactly. The source power is then found by bisection on the sign
//! of `dV/dSs = γ_sd + Σ γ_si·B_i(B_i+1)/(A_i+B_i+1)² − ν²` (`B_i = S_i·γ_id`),
//! which is monotone because the partially maximized objective is concave.

use crate::channel::FadingRealization;
use crate::combining::{dual_hop_snr, PowerAllocation, PowerBudget};
use crate::error::{Error, Result};
use crate::numeric::golden_max;

const OUTER_MAX_ITER: usize = 200;

/// Upper bound on `Ss/S` that keeps every relay's BER at or above the floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityClamp {
    max_ss_ratio: f64,
}

impl SecurityClamp {
    /// `Γ_r / γ_max`, rounded down until `clamp·γ_max ≤ Γ_r` holds in floating
    /// point. `γ_max` is the strongest source-relay SNR over all relays.
    pub fn new(gamma_r: f64, gamma_max: f64) -> Self {
        if gamma_max <= 0.0 {
            return Self::unbounded();
        }
        let mut clamp = gamma_r / gamma_max;
        while clamp > 0.0 && clamp * gamma_max > gamma_r {
            clamp = clamp.next_down();
        }
        Self { max_ss_ratio: clamp }
    }

    pub fn for_fading(gamma_r: f64, fading: &FadingRealization) -> Self {
        Self::new(gamma_r, fading.strongest_source_relay().1)
    }

    pub fn from_ratio(max_ss_ratio: f64) -> Result<Self> {
        if !(max_ss_ratio >= 0.0) {
            return Err(Error::InvalidArgument(format!("security clamp must be nonnegative, got {max_ss_ratio}")));
        }
        Ok(Self { max_ss_ratio })
    }

    pub fn unbounded() -> Self {
        Self {
            max_ss_ratio: f64::INFINITY,
        }
    }

    pub fn max_ss_ratio(&self) -> f64 {
        self.max_ss_ratio
    }
}

/// Allocation plus the multiplier information behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSolution {
    pub alloc: PowerAllocation,
    /// Water level `ν = sqrt(−λ₁)` of the sum-power constraint.
    pub nu: f64,
    /// Source power of the problem without the security clamp.
    pub unclamped_source: f64,
    /// Whether the security clamp set the source power.
    pub clamped: bool,
}

impl PowerSolution {
    /// True when the source power is strictly inside `(0, S_tot)` and set by
    /// stationarity rather than by a bound.
    pub fn is_interior(&self, budget: &PowerBudget) -> bool {
        !self.clamped && self.alloc.source > 0.0 && self.alloc.source < budget.total
    }
}

fn check_inputs(coop: &[usize], fading: &FadingRealization, budget: &PowerBudget) -> Result<()> {
    if coop.is_empty() {
        return Err(Error::InvalidArgument("cooperating set is empty".into()));
    }
    if let Some(&bad) = coop.iter().find(|&&i| i >= fading.n_relays()) {
        return Err(Error::InvalidArgument(format!(
            "relay index {bad} out of range for {} relays",
            fading.n_relays()
        )));
    }
    if !(budget.total > 0.0) {
        return Err(Error::InfeasibleBudget(format!("total power {} is not positive", budget.total)));
    }
    Ok(())
}

/// Exact water-filling of `remaining` relay power at source power `ss`.
/// Writes relay powers into `out` (same order as `coop`) and returns `ν`.
fn water_fill(ss: f64, coop: &[usize], fading: &FadingRealization, remaining: f64, out: &mut [f64]) -> f64 {
    let n = coop.len();
    let mut level = Vec::with_capacity(n);
    for (k, &i) in coop.iter().enumerate() {
        out[k] = 0.0;
        let a = ss * fading.gamma_s[i];
        let g = fading.gamma_d[i];
        let t = if a > 0.0 && g > 0.0 { (g * a / (a + 1.0)).sqrt() } else { 0.0 };
        level.push((k, a, g, t));
    }
    level.sort_by(|x, y| y.3.total_cmp(&x.3).then(x.0.cmp(&y.0)));

    let top = level.first().map_or(0.0, |l| l.3);
    if top <= 0.0 {
        return 0.0;
    }
    if remaining <= 0.0 {
        return top;
    }

    let mut num = remaining;
    let mut den = 0.0;
    let mut active = 0;
    let mut nu = top;
    for (idx, &(_, a, g, t)) in level.iter().enumerate() {
        if t <= 0.0 {
            break;
        }
        num += (a + 1.0) / g;
        den += (g * a * (a + 1.0)).sqrt() / g;
        nu = den / num;
        active = idx + 1;
        match level.get(idx + 1) {
            Some(next) if next.3 > nu => continue,
            _ => break,
        }
    }
    for &(k, a, g, _) in &level[..active] {
        let c = (g * a * (a + 1.0)).sqrt();
        out[k] = ((c / nu - (a + 1.0)) / g).max(0.0);
    }
    nu
}

/// `dV/dSs` at source power `ss` with the relay powers water-filled.
fn source_marginal(ss: f64, coop: &[usize], fading: &FadingRealization, budget: &PowerBudget, buf: &mut [f64]) -> f64 {
    let nu = water_fill(ss, coop, fading, budget.total - ss, buf);
    let mut d = fading.gamma_sd;
    for (k, &i) in coop.iter().enumerate() {
        let a = ss * fading.gamma_s[i];
        let b = buf[k] * fading.gamma_d[i];
        let den = a + b + 1.0;
        d += fading.gamma_s[i] * b * (b + 1.0) / (den * den);
    }
    d - nu * nu
}

fn objective(ss: f64, relays: &[f64], coop: &[usize], fading: &FadingRealization) -> f64 {
    let mut v = ss * fading.gamma_sd;
    for (k, &i) in coop.iter().enumerate() {
        v += dual_hop_snr(ss, relays[k], fading.gamma_s[i], fading.gamma_d[i]);
    }
    v
}

/// Optimal source power ignoring the security clamp.
pub fn unclamped_source_power(coop: &[usize], fading: &FadingRealization, budget: &PowerBudget) -> Result<f64> {
    check_inputs(coop, fading, budget)?;
    let total = budget.total;
    let mut buf = vec![0.0; coop.len()];
    if source_marginal(total, coop, fading, budget, &mut buf) >= 0.0 {
        return Ok(total);
    }
    let (mut lo, mut hi) = (0.0f64, total);
    for _ in 0..OUTER_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if source_marginal(mid, coop, fading, budget, &mut buf) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Pick the better end of the final bracket; ties go to the larger power.
    let value = |ss: f64, buf: &mut [f64]| {
        water_fill(ss, coop, fading, total - ss, buf);
        objective(ss, buf, coop, fading)
    };
    let v_lo = value(lo, &mut buf);
    let v_hi = value(hi, &mut buf);
    Ok(if v_hi >= v_lo { hi } else { lo })
}

/// Relay powers for a given source power: the water-filling of `S_tot − Ss`.
pub fn allocate_with_source(
    coop: &[usize],
    fading: &FadingRealization,
    budget: &PowerBudget,
    source: f64,
) -> PowerSolution {
    let mut relays = vec![0.0; coop.len()];
    let nu = water_fill(source, coop, fading, budget.total - source, &mut relays);
    PowerSolution {
        alloc: PowerAllocation::new(source, coop.iter().copied().zip(relays)),
        nu,
        unclamped_source: source,
        clamped: false,
    }
}

/// Full solution: unclamped optimum, then the clamp if it binds.
pub fn solve_power(
    coop: &[usize],
    fading: &FadingRealization,
    clamp: SecurityClamp,
    budget: &PowerBudget,
) -> Result<PowerSolution> {
    let free = unclamped_source_power(coop, fading, budget)?;
    Ok(solve_with_unclamped(coop, fading, clamp, budget, free))
}

/// Apply `clamp` to a previously computed unclamped source power. Gives the
/// same result as [`solve_power`] without repeating the outer search.
pub fn solve_with_unclamped(
    coop: &[usize],
    fading: &FadingRealization,
    clamp: SecurityClamp,
    budget: &PowerBudget,
    unclamped: f64,
) -> PowerSolution {
    let clamped = unclamped > clamp.max_ss_ratio();
    let source = if clamped { clamp.max_ss_ratio() } else { unclamped };
    let mut sol = allocate_with_source(coop, fading, budget, source);
    sol.unclamped_source = unclamped;
    sol.clamped = clamped;
    sol
}

pub fn optimize_power(
    coop: &[usize],
    fading: &FadingRealization,
    clamp: SecurityClamp,
    budget: &PowerBudget,
) -> Result<PowerAllocation> {
    solve_power(coop, fading, clamp, budget).map(|s| s.alloc)
}

/// Relative residual of the source stationarity condition at `sol`:
/// `|γ_sd + Σ γ_si·B(B+1)/(A+B+1)² − ν²| / max(terms)`.
pub fn kkt_residual(coop: &[usize], fading: &FadingRealization, sol: &PowerSolution) -> f64 {
    let ss = sol.alloc.source;
    let mut grad = fading.gamma_sd;
    for &i in coop {
        let a = ss * fading.gamma_s[i];
        let b = sol.alloc.relay(i).unwrap_or(0.0) * fading.gamma_d[i];
        let den = a + b + 1.0;
        grad += fading.gamma_s[i] * b * (b + 1.0) / (den * den);
    }
    let penalty = sol.nu * sol.nu;
    let scale = grad.max(penalty);
    if scale == 0.0 {
        0.0
    } else {
        (grad - penalty).abs() / scale
    }
}

/// Relay power from the stationarity condition for given `Ss` and `ν`.
pub fn stationary_relay_power(ss: f64, gamma_si: f64, gamma_id: f64, nu: f64) -> f64 {
    let a = ss * gamma_si;
    if gamma_id <= 0.0 || a <= 0.0 {
        return 0.0;
    }
    let c = (gamma_id * a * (a + 1.0)).sqrt();
    ((c / nu - (a + 1.0)) / gamma_id).max(0.0)
}

/// Stationary source power of the single-relay problem with `S_i = S_tot − Ss`,
/// from the quadratic `μS² + θS + ρ = 0`. `None` when the discriminant is
/// negative. A root that is not positive means the objective increases over
/// the whole budget and is reported as `+∞`.
pub fn single_relay_stationary_point(gamma_sd: f64, gamma_si: f64, gamma_id: f64, total: f64) -> Option<f64> {
    let (sd, si, id, t) = (gamma_sd, gamma_si, gamma_id, total);
    let mu = id * id * (si + sd) + si * si * (sd - id) - 2.0 * sd * id * si;
    let theta = 2.0 * (si * (sd - id + id * sd * t) - id * id * t * (si + sd) - id * sd);
    let rho = sd + id * id * (si + sd) * t * t + (2.0 * id * sd + id * si) * t;
    let disc = theta * theta - 4.0 * mu * rho;
    if disc < 0.0 {
        return None;
    }
    let root = disc.sqrt();
    // The minus root, written to avoid cancellation; the θ ≤ 0 form also
    // covers μ → 0, where it tends to −ρ/θ.
    let s = if theta <= 0.0 {
        2.0 * rho / (root - theta)
    } else {
        (-theta - root) / (2.0 * mu)
    };
    Some(if s > 0.0 { s } else { f64::INFINITY })
}

/// Optimal source power of the single-relay problem for a clamp ratio.
pub fn single_relay_source_power(gamma_sd: f64, gamma_si: f64, gamma_id: f64, total: f64, clamp: f64) -> f64 {
    let upper = total.min(clamp);
    match single_relay_stationary_point(gamma_sd, gamma_si, gamma_id, total) {
        Some(s) => s.min(upper),
        None => golden_max(
            |ss| ss * gamma_sd + dual_hop_snr(ss, total - ss, gamma_si, gamma_id),
            0.0,
            upper,
            1e-14 * upper.max(1.0),
            400,
        ),
    }
}

/// Closed-form allocation for a single cooperating relay.
pub fn optimize_power_single_relay(
    relay: usize,
    fading: &FadingRealization,
    clamp: SecurityClamp,
    budget: &PowerBudget,
) -> Result<PowerAllocation> {
    check_inputs(&[relay], fading, budget)?;
    let total = budget.total;
    let ss = single_relay_source_power(
        fading.gamma_sd,
        fading.gamma_s[relay],
        fading.gamma_d[relay],
        total,
        clamp.max_ss_ratio(),
    );
    Ok(PowerAllocation::new(ss, [(relay, total - ss)]))
}

/// Constant-power relays: `S_i = S`, source gets what is left, up to the clamp.
pub fn cpr_allocation(coop: &[usize], clamp: SecurityClamp, budget: &PowerBudget) -> Result<PowerAllocation> {
    let n_coop = coop.len();
    let left = budget.total - n_coop as f64;
    if !(left > 0.0) {
        return Err(Error::InfeasibleCpr {
            total: budget.total,
            n_coop,
        });
    }
    Ok(PowerAllocation::new(left.min(clamp.max_ss_ratio()), coop.iter().map(|&i| (i, 1.0))))
}

/// Brute-force reference: exhaustive search over the simplex
/// `Ss + ΣS_i = S_tot` at `resolution` steps per unit of budget share, then
/// pairwise coordinate descent. Meant for `|coop| ≤ 3`.
pub fn grid_oracle(
    coop: &[usize],
    fading: &FadingRealization,
    clamp: SecurityClamp,
    budget: &PowerBudget,
    resolution: usize,
) -> Result<PowerAllocation> {
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!("grid resolution must be at least 2, got {resolution}")));
    }
    if coop.is_empty() {
        return Err(Error::InvalidArgument("cooperating set is empty".into()));
    }
    let total = budget.total;
    if total <= 0.0 {
        return Ok(PowerAllocation::new(0.0, coop.iter().map(|&i| (i, 0.0))));
    }
    let cap = clamp.max_ss_ratio().min(total);
    let step = total / resolution as f64;
    let dims = coop.len() + 1;

    // x[0] is the source, x[1..] the relays.
    let mut best = vec![0.0; dims];
    let mut best_v = f64::NEG_INFINITY;
    let mut counts = vec![0usize; dims];
    let mut x = vec![0.0; dims];
    enumerate_compositions(resolution, &mut counts, 0, &mut |c| {
        let ss = c[0] as f64 * step;
        if ss > cap {
            return;
        }
        for (xi, &ci) in x.iter_mut().zip(c) {
            *xi = ci as f64 * step;
        }
        let v = objective(x[0], &x[1..], coop, fading);
        if v > best_v || (v == best_v && x[0] > best[0]) {
            best_v = v;
            best.copy_from_slice(&x);
        }
    });
    // The grid may straddle the clamp; the projected point is a valid start.
    if cap < total {
        let mut y = vec![0.0; dims];
        y[0] = cap;
        for v in &mut y[1..] {
            *v = (total - cap) / coop.len() as f64;
        }
        if objective(y[0], &y[1..], coop, fading) > best_v {
            best = y;
        }
    }

    polish(&mut best, coop, fading, cap, step);
    Ok(PowerAllocation::new(best[0], coop.iter().copied().zip(best[1..].iter().copied())))
}

fn enumerate_compositions<F: FnMut(&[usize])>(left: usize, counts: &mut Vec<usize>, pos: usize, visit: &mut F) {
    if pos == counts.len() - 1 {
        counts[pos] = left;
        visit(counts);
        return;
    }
    for c in 0..=left {
        counts[pos] = c;
        enumerate_compositions(left - c, counts, pos + 1, visit);
    }
}

/// Pairwise mass transfers with golden-section line search until no pair
/// improves the objective.
fn polish(x: &mut [f64], coop: &[usize], fading: &FadingRealization, cap: f64, step: f64) {
    let dims = x.len();
    let eval = |y: &[f64]| objective(y[0], &y[1..], coop, fading);
    let mut current = eval(x);
    for _sweep in 0..500 {
        let start = current;
        for from in 0..dims {
            for to in 0..dims {
                if from == to {
                    continue;
                }
                // Move δ ∈ [0, max] from `from` to `to`.
                let mut max = x[from];
                if to == 0 {
                    max = max.min(cap - x[0]);
                }
                if max <= 0.0 {
                    continue;
                }
                let mut y = x.to_vec();
                let moved = |d: f64, y: &mut Vec<f64>| {
                    y[from] = x[from] - d;
                    y[to] = x[to] + d;
                };
                let d = golden_max(
                    |d| {
                        moved(d, &mut y);
                        eval(&y)
                    },
                    0.0,
                    max.min(4.0 * step.max(max * 1e-3)).max(0.0).min(max),
                    1e-15 * (1.0 + max),
                    300,
                );
                let mut z = x.to_vec();
                z[from] = x[from] - d;
                z[to] = x[to] + d;
                if to == 0 {
                    z[0] = z[0].min(cap);
                }
                let v = eval(&z);
                if v > current {
                    current = v;
                    x.copy_from_slice(&z);
                }
            }
        }
        if current - start <= 1e-15 * current.abs() {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combining::{equivalent_snr, Combining};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gamma_eq(alloc: &PowerAllocation, fading: &FadingRealization, coop: &[usize]) -> f64 {
        equivalent_snr(alloc, fading, coop, Combining::Exact).unwrap()
    }

    fn random_fading(rng: &mut ChaCha8Rng, n: usize) -> FadingRealization {
        let mut e = || -(1.0 - rng.random::<f64>()).ln() * 10f64.powf(rng.random_range(-1.0..2.0));
        let sd = e();
        let s = (0..n).map(|_| e()).collect();
        let d = (0..n).map(|_| e()).collect();
        FadingRealization::new(sd, s, d).unwrap()
    }

    #[test]
    fn clamp_rounds_down() {
        for &(r, g) in &[(0.558, 3.0), (4.476538, 0.7), (1.0, 1e-300), (3.0, 7.0)] {
            let c = SecurityClamp::new(r, g);
            assert!(c.max_ss_ratio() * g <= r);
            assert!(c.max_ss_ratio() >= 0.9999 * r / g);
        }
        assert!(SecurityClamp::new(1.0, 0.0).max_ss_ratio().is_infinite());
    }

    #[test]
    fn dead_second_hops_give_everything_to_source() {
        let fading = FadingRealization::new(1.0, vec![2.0, 3.0], vec![0.0, 0.0]).unwrap();
        let budget = PowerBudget::for_relays(2);
        let a = optimize_power(&[0, 1], &fading, SecurityClamp::unbounded(), &budget).unwrap();
        assert_eq!(a.source, 3.0);
        assert_eq!(a.relay(0), Some(0.0));
        assert_eq!(a.relay(1), Some(0.0));
    }

    #[test]
    fn rejects_bad_inputs() {
        let fading = FadingRealization::new(1.0, vec![2.0], vec![1.0]).unwrap();
        let clamp = SecurityClamp::unbounded();
        assert!(optimize_power(&[], &fading, clamp, &PowerBudget::for_relays(1)).is_err());
        assert!(optimize_power(&[0], &fading, clamp, &PowerBudget { total: 0.0 }).is_err());
        assert!(grid_oracle(&[0], &fading, clamp, &PowerBudget::for_relays(1), 1).is_err());
    }

    #[test]
    fn oracle_zero_budget() {
        let fading = FadingRealization::new(1.0, vec![2.0], vec![1.0]).unwrap();
        let a = grid_oracle(&[0], &fading, SecurityClamp::unbounded(), &PowerBudget { total: 0.0 }, 10).unwrap();
        assert_eq!(a.total(), 0.0);
    }

    #[test]
    fn single_relay_closed_form_agrees_with_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let budget = PowerBudget::for_relays(1);
        for _ in 0..1000 {
            let f = random_fading(&mut rng, 1);
            let clamp = if rng.random::<bool>() {
                SecurityClamp::unbounded()
            } else {
                SecurityClamp::new(rng.random_range(0.1..5.0), f.gamma_s[0])
            };
            let general = optimize_power(&[0], &f, clamp, &budget).unwrap();
            let closed = optimize_power_single_relay(0, &f, clamp, &budget).unwrap();
            let (g1, g2) = (gamma_eq(&general, &f, &[0]), gamma_eq(&closed, &f, &[0]));
            assert!((g1 - g2).abs() <= 1e-8 * g1.max(g2), "{f:?} {general:?} {closed:?}");
        }
    }

    #[test]
    fn closed_form_matches_one_dimensional_scan() {
        let f = FadingRealization::new(0.0, vec![4.0], vec![4.0]).unwrap();
        let budget = PowerBudget::for_relays(1);
        let a = optimize_power_single_relay(0, &f, SecurityClamp::unbounded(), &budget).unwrap();
        assert!(a.source > 0.0 && a.source < 2.0);
        let scan = (0..=200_000)
            .map(|k| {
                let ss = 2.0 * k as f64 / 200_000.0;
                ss * f.gamma_sd + dual_hop_snr(ss, 2.0 - ss, 4.0, 4.0)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let got = gamma_eq(&a, &f, &[0]);
        assert!(got >= scan - 1e-8 * scan);
    }

    #[test]
    fn clamp_active_sets_source_exactly() {
        let f = FadingRealization::new(1.0, vec![2.0], vec![3.0]).unwrap();
        let clamp = SecurityClamp::from_ratio(0.05).unwrap();
        let a = optimize_power_single_relay(0, &f, clamp, &PowerBudget::for_relays(1)).unwrap();
        assert_eq!(a.source, 0.05);
        let b = optimize_power(&[0], &f, clamp, &PowerBudget::for_relays(1)).unwrap();
        assert_eq!(b.source, 0.05);
    }

    #[test]
    fn strong_direct_link_takes_all_power() {
        let f = FadingRealization::new(1e6, vec![1.0], vec![1.0]).unwrap();
        let budget = PowerBudget::for_relays(1);
        let a = optimize_power_single_relay(0, &f, SecurityClamp::unbounded(), &budget).unwrap();
        assert_eq!(a.source, 2.0);
        let clamp = SecurityClamp::from_ratio(1.5).unwrap();
        let a = optimize_power_single_relay(0, &f, clamp, &budget).unwrap();
        assert_eq!(a.source, 1.5);
    }

    #[test]
    fn two_relays_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let budget = PowerBudget::for_relays(2);
        for _ in 0..50 {
            let f = random_fading(&mut rng, 2);
            let clamp = SecurityClamp::new(rng.random_range(0.5..5.0), f.strongest_source_relay().1);
            let opt = optimize_power(&[0, 1], &f, clamp, &budget).unwrap();
            let oracle = grid_oracle(&[0, 1], &f, clamp, &budget, 200).unwrap();
            let (g, o) = (gamma_eq(&opt, &f, &[0, 1]), gamma_eq(&oracle, &f, &[0, 1]));
            assert!(o <= g * (1.0 + 1e-6), "oracle beat solver: {o} vs {g}");
            assert!(g - o <= 1e-6 * g, "solver {g} oracle {o}");
        }
    }

    #[test]
    fn kkt_conditions_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 1..=3 {
            let budget = PowerBudget::for_relays(n);
            let coop: Vec<usize> = (0..n).collect();
            for _ in 0..200 {
                let f = random_fading(&mut rng, n);
                let sol = solve_power(&coop, &f, SecurityClamp::unbounded(), &budget).unwrap();
                assert!((sol.alloc.total() - budget.total).abs() <= 1e-10 * budget.total || sol.nu == 0.0);
                if sol.is_interior(&budget) {
                    assert!(kkt_residual(&coop, &f, &sol) <= 1e-8, "{f:?} {sol:?}");
                    for &i in &coop {
                        let si = stationary_relay_power(sol.alloc.source, f.gamma_s[i], f.gamma_d[i], sol.nu);
                        assert!((si - sol.alloc.relay(i).unwrap()).abs() <= 1e-8 * (1.0 + si));
                    }
                }
            }
        }
    }

    #[test]
    fn more_budget_never_hurts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let f = random_fading(&mut rng, 2);
            let clamp = SecurityClamp::new(2.0, f.strongest_source_relay().1);
            let mut prev = 0.0;
            for t in [0.5, 1.0, 2.0, 3.0, 6.0] {
                let a = optimize_power(&[0, 1], &f, clamp, &PowerBudget { total: t }).unwrap();
                let g = gamma_eq(&a, &f, &[0, 1]);
                assert!(g >= prev * (1.0 - 1e-12));
                prev = g;
            }
        }
    }

    #[test]
    fn cpr_rule() {
        let budget = PowerBudget::for_relays(5);
        let all = [0, 1, 2, 3, 4];
        let a = cpr_allocation(&all, SecurityClamp::from_ratio(5.0).unwrap(), &budget).unwrap();
        assert_eq!(a.source, 1.0);
        assert!(all.iter().all(|&i| a.relay(i) == Some(1.0)));
        let a = cpr_allocation(&[0], SecurityClamp::from_ratio(0.3).unwrap(), &budget).unwrap();
        assert_eq!(a.source, 0.3);
        assert!(matches!(
            cpr_allocation(&all, SecurityClamp::unbounded(), &PowerBudget { total: 5.0 }),
            Err(Error::InfeasibleCpr { .. })
        ));
    }

    #[test]
    fn cpr_is_optimal_under_separate_constraints() {
        // With per-node caps of S the relays should sit at their cap, and the
        // source at min(1, clamp): a grid over the box confirms it.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let f = random_fading(&mut rng, 2);
            let clamp = SecurityClamp::new(rng.random_range(0.2..3.0), f.strongest_source_relay().1);
            let cpr = cpr_allocation(&[0, 1], clamp, &PowerBudget::for_relays(2)).unwrap();
            let g = gamma_eq(&cpr, &f, &[0, 1]);
            let cap = clamp.max_ss_ratio().min(1.0);
            for i in 0..=20 {
                for j in 0..=20 {
                    for k in 0..=20 {
                        let a = PowerAllocation::new(cap * i as f64 / 20.0, [(0, j as f64 / 20.0), (1, k as f64 / 20.0)]);
                        assert!(gamma_eq(&a, &f, &[0, 1]) <= g * (1.0 + 1e-12));
                    }
                }
            }
        }
    }
}
