//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate meets `max(abs_tol, rel_tol * |I|)`. Interval bookkeeping is a
//! plain vector scanned in index order, so the result is a deterministic
//! function of the integrand.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

impl QuadratureOptions {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_intervals(mut self, max_intervals: usize) -> Self {
        self.max_intervals = max_intervals;
        self
    }
}

/// Integral estimate with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kron += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    Segment {
        a,
        b,
        value: kron * half,
        error: ((kron - gauss) * half).abs(),
    }
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadratureOptions) -> Result<Integral> {
    integrate_with_breaks(f, &[a, b], opts)
}

/// Integrate `f` over `[points[0], points[last]]`, starting from the panels
/// delimited by `points`. Points must be nondecreasing; empty panels are
/// skipped. Interior points are where the integrand has kinks or jumps.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    opts: QuadratureOptions,
) -> Result<Integral> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("quadrature needs at least two points".into()));
    }
    if points.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidArgument(format!("quadrature breakpoints not sorted: {points:?}")));
    }

    let mut segments: Vec<Segment> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| kronrod(&mut f, w[0], w[1]))
        .collect();
    if segments.is_empty() {
        return Ok(Integral { value: 0.0, error: 0.0, intervals: 0 });
    }

    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target {
            return Ok(Integral { value, error, intervals: segments.len() });
        }
        if !value.is_finite() || segments.len() >= opts.max_intervals {
            return Err(Error::QuadratureNonConvergence { estimate: value, error });
        }

        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, be), (i, s)| if s.error > be { (i, s.error) } else { (bi, be) });
        let seg = segments[worst];
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            // Interval at floating-point resolution; it cannot be refined further.
            return Err(Error::QuadratureNonConvergence { estimate: value, error });
        }
        segments[worst] = kronrod(&mut f, seg.a, mid);
        segments.push(kronrod(&mut f, mid, seg.b));
    }
}

/// Upper truncation point of an exponential with the given mean at the
/// `1 - tail` quantile.
pub fn exponential_quantile_cut(mean: f64, tail: f64) -> f64 {
    -mean * tail.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| 3.0 * x * x + 1.0, 0.0, 2.0, QuadratureOptions::default()).unwrap();
        assert!((r.value - 10.0).abs() < 1e-13);
    }

    #[test]
    fn exponential_tail() {
        let mean = 3.0;
        let cut = exponential_quantile_cut(mean, 1e-12);
        let r = integrate(|x| (-x / mean).exp() / mean, 0.0, cut, QuadratureOptions::default().with_rel_tol(1e-12))
            .unwrap();
        assert!((r.value - 1.0).abs() < 1e-11);
    }

    #[test]
    fn breakpoints_handle_jumps() {
        let opts = QuadratureOptions::default().with_rel_tol(1e-12);
        let step = |x: f64| if x < 1.0 { 1.0 } else { 2.0 };
        let r = integrate_with_breaks(step, &[0.0, 1.0, 3.0], opts).unwrap();
        assert!((r.value - 5.0).abs() < 1e-13);
        // Without the breakpoint the jump still converges, only slower.
        let r = integrate(step, 0.0, 3.0, opts.with_abs_tol(1e-9)).unwrap();
        assert!((r.value - 5.0).abs() < 1e-8);
    }

    #[test]
    fn reports_non_convergence() {
        let opts = QuadratureOptions::default().with_max_intervals(4).with_rel_tol(1e-14);
        let err = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, opts).unwrap_err();
        assert!(matches!(err, Error::QuadratureNonConvergence { .. }));
    }

    #[test]
    fn rejects_unsorted_breaks() {
        assert!(integrate_with_breaks(|x| x, &[1.0, 0.0], QuadratureOptions::default()).is_err());
    }
}
