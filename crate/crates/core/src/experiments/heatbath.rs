//! Subinterval invariance: a heat bath gives the same slope on every
//! subinterval of the window, and only an exponential-form bath (or a
//! linear rate function) does.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{finish, format_series, series, sweep, validate_grid, Check, ConvergenceReport, Executor, Row, Sequential};
use crate::conditioning::derive_seed;
use crate::dist::{ContinuousDist, Dist};
use crate::error::{invalid, Result};
use crate::interval::Interval;
use crate::ldp::{ldp_tilt_param, RateFunction};
use crate::tilting::log_interval_prob_slope;

#[derive(Debug, Clone, PartialEq)]
pub struct HeatBathSpec {
    /// Subinterval widths are `width_scale / n`.
    pub n_grid: Vec<u64>,
    pub seed: u64,
    pub width_scale: f64,
    pub subintervals: usize,
    /// Slope of the exponential-form bath and its window.
    pub psi: f64,
    pub window: Interval,
    pub contrast_window: Interval,
    /// Linear rate function `φ(y) = slope·y + intercept`.
    pub linear_slope: f64,
    pub linear_intercept: f64,
    /// Window for the Cramér rate function of `Exponential(1)`.
    pub cramer_window: Interval,
    pub invariance_tol: f64,
    pub contrast_floor: f64,
    pub linear_tol: f64,
}

impl Default for HeatBathSpec {
    fn default() -> Self {
        Self {
            n_grid: vec![4, 8, 16, 32],
            seed: 0,
            width_scale: 0.4,
            subintervals: 20,
            psi: 2.0,
            window: Interval { h: -1.0, delta: 1.0 },
            contrast_window: Interval { h: -2.0, delta: 1.0 },
            linear_slope: -2.0,
            linear_intercept: 1.0,
            cramer_window: Interval { h: 0.2, delta: 0.6 },
            invariance_tol: 1e-8,
            contrast_floor: 0.1,
            linear_tol: 1e-10,
        }
    }
}

/// Law with density `∝ e^{ψy}` on `window`.
pub fn exponential_form_bath(psi: f64, window: &Interval) -> Result<ContinuousDist> {
    let (lo, hi) = (window.lo(), window.hi());
    if !(window.delta > 0.0) {
        return Err(invalid("exponential-form bath needs a window of positive width"));
    }
    if psi == 0.0 {
        return ContinuousDist::uniform(lo, hi);
    }
    let u = ContinuousDist::truncated(ContinuousDist::exponential(psi.abs())?, 0.0, window.delta)?;
    if psi > 0.0 {
        ContinuousDist::affine(u, -1.0, hi)
    } else {
        ContinuousDist::affine(u, 1.0, lo)
    }
}

/// Max minus min of `f` over `count` random subintervals of `window` with
/// width `width`.
pub fn subinterval_spread<F: Fn(&Interval) -> Result<f64>>(
    f: F,
    window: &Interval,
    width: f64,
    count: usize,
    seed: u64,
) -> Result<(f64, Vec<f64>)> {
    if !(width > 0.0 && width < window.delta) || count < 2 {
        return Err(invalid("subintervals need 0 < width < δ and at least two draws"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vals = Vec::with_capacity(count);
    for _ in 0..count {
        let h = window.lo() + (window.delta - width) * rng.random::<f64>();
        vals.push(f(&Interval::new(h, width)?)?);
    }
    let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    Ok((hi - lo, vals))
}

pub fn exp_heatbath_invariance(spec: &HeatBathSpec) -> Result<ConvergenceReport> {
    run(spec, &Sequential)
}

pub(crate) fn run(spec: &HeatBathSpec, exec: &dyn Executor) -> Result<ConvergenceReport> {
    validate_grid(&spec.n_grid)?;
    let expo = exponential_form_bath(spec.psi, &spec.window)?;
    let normal = ContinuousDist::normal(0.0, 1.0)?;
    let lin = RateFunction::linear(spec.linear_slope, spec.linear_intercept, (f64::NEG_INFINITY, f64::INFINITY));
    let exp1: Dist = ContinuousDist::exponential(1.0)?.into();
    let cramer = RateFunction::of(&exp1)?;
    let count = spec.subintervals;

    let rows = sweep(exec, &spec.n_grid, &|n| {
        let w = spec.width_scale / n as f64;
        let seed = derive_seed(spec.seed, n);
        let (se, ve) = subinterval_spread(|s| log_interval_prob_slope(&expo, s), &spec.window, w, count, seed)?;
        let (sn, _) =
            subinterval_spread(|s| log_interval_prob_slope(&normal, s), &spec.contrast_window, w, count, seed)?;
        let (sl, _) = subinterval_spread(|s| Ok(ldp_tilt_param(&lin, s)?.lambda), &spec.window, w, count, seed)?;
        let (sc, _) =
            subinterval_spread(|s| Ok(ldp_tilt_param(&cramer, s)?.lambda), &spec.cramer_window, w, count, seed)?;
        let mean = ve.iter().sum::<f64>() / ve.len() as f64;
        Ok(vec![
            Row::new(n, "width", w),
            Row::new(n, "spread_exponential", se),
            Row::new(n, "psi_exponential", mean),
            Row::new(n, "spread_normal", sn),
            Row::new(n, "spread_linear", sl),
            Row::new(n, "spread_cramer", sc),
        ])
    })?;

    let max = |m: &str| series(&rows, m).iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let min = |m: &str| series(&rows, m).iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let normal_spread = series(&rows, "spread_normal");
    let checks = vec![
        Check::new(
            "exponential_invariant",
            max("spread_exponential") < spec.invariance_tol,
            format!("max spread {:.3e}", max("spread_exponential")),
        ),
        Check::new(
            "normal_contrast",
            min("spread_normal") > spec.contrast_floor,
            format!(
                "min spread {:.4} against floor {}; {}",
                min("spread_normal"),
                spec.contrast_floor,
                format_series(&normal_spread)
            ),
        ),
        Check::new(
            "linear_invariant",
            max("spread_linear") < spec.linear_tol,
            format!("max spread {:.3e}", max("spread_linear")),
        ),
        Check::new("cramer_varies", min("spread_cramer") > 0.0, format!("min spread {:.4e}", min("spread_cramer"))),
    ];
    Ok(finish("exp_heatbath_invariance", rows, "spread_normal", "n", &normal_spread, checks, vec![]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_form_has_constant_slope() {
        let i = Interval::new(-1.0, 1.0).unwrap();
        let b = exponential_form_bath(2.0, &i).unwrap();
        let (spread, vals) = subinterval_spread(|s| log_interval_prob_slope(&b, s), &i, 0.1, 20, 3).unwrap();
        assert!(spread < 1e-10, "{spread}");
        assert!(vals.iter().all(|v| (v - 2.0).abs() < 1e-10));
        let d = exponential_form_bath(-1.5, &i).unwrap();
        let (_, vals) = subinterval_spread(|s| log_interval_prob_slope(&d, s), &i, 0.1, 20, 3).unwrap();
        assert!(vals.iter().all(|v| (v + 1.5).abs() < 1e-10));
    }

    #[test]
    fn normal_bath_slope_varies() {
        let n01 = ContinuousDist::normal(0.0, 1.0).unwrap();
        let i = Interval::new(-2.0, 1.0).unwrap();
        let (spread, _) = subinterval_spread(|s| log_interval_prob_slope(&n01, s), &i, 0.1, 20, 3).unwrap();
        assert!(spread > 0.1);
    }

    #[test]
    fn linear_rate_gives_constant_temperature() {
        let lin = RateFunction::linear(-2.0, 1.0, (f64::NEG_INFINITY, f64::INFINITY));
        let i = Interval::new(-1.0, 1.0).unwrap();
        let (spread, vals) = subinterval_spread(|s| Ok(ldp_tilt_param(&lin, s)?.lambda), &i, 0.1, 20, 3).unwrap();
        assert!(spread < 1e-10);
        assert!(vals.iter().all(|v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn default_sweep_passes() {
        let rep = exp_heatbath_invariance(&HeatBathSpec::default()).unwrap();
        assert!(rep.passed(), "{:?}", rep.checks);
        assert_eq!(rep, exp_heatbath_invariance(&HeatBathSpec::default()).unwrap());
    }
}
