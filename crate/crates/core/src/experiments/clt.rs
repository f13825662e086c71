//! Normal approximation error of standardized sums.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::{finish, format_series, series, sweep, validate_grid, Check, ConvergenceReport, Executor, Row, Sequential};
use crate::dist::{ContinuousDist, Dist};
use crate::error::{invalid, Result};
use crate::special::std_normal_cdf;

#[derive(Debug, Clone)]
pub struct CltSpec {
    pub n_grid: Vec<u64>,
    pub seed: u64,
    pub summand: Dist,
    pub z_points: usize,
    /// Evaluation points are `linspace(-z_max, z_max, z_points)`.
    pub z_max: f64,
    pub slope_band: (f64, f64),
    /// Below this sup error the sum counts as exactly normal and no slope
    /// is fitted.
    pub exact_tol: f64,
}

impl Default for CltSpec {
    fn default() -> Self {
        Self {
            n_grid: vec![16, 64, 256, 1024],
            seed: 0,
            summand: ContinuousDist::Exponential { rate: 1.0 }.into(),
            z_points: 200,
            z_max: 4.0,
            slope_band: (-0.65, -0.35),
            exact_tol: 1e-12,
        }
    }
}

impl CltSpec {
    pub fn poisson() -> Result<Self> {
        Ok(Self {
            summand: crate::dist::DiscreteDist::poisson(1.0)?.into(),
            slope_band: (-0.7, -0.3),
            ..Self::default()
        })
    }
}

/// `P(S < t)` for the law of a sum.
fn strict_cdf(s: &Dist, t: f64) -> f64 {
    match s {
        Dist::Continuous(c) => c.cdf(t),
        Dist::Discrete(d) => (d.prob_between(f64::NEG_INFINITY, t) - d.pmf_at(t)).max(0.0),
    }
}

/// Sup over the z-grid of `|P(T_n < z) - Φ(z)|`, `T_n` the standardized
/// sum of `n` summands.
pub fn sup_cdf_error(summand: &Dist, n: u64, zs: &[f64]) -> Result<f64> {
    let (mu, var) = (summand.mean(), summand.variance());
    if !(var > 0.0) || !var.is_finite() {
        return Err(invalid("summand needs positive finite variance"));
    }
    let s = summand.sum_law(n as u32)?;
    let (shift, scale) = (n as f64 * mu, (n as f64 * var).sqrt());
    Ok(zs.iter().map(|&z| (strict_cdf(&s, shift + scale * z) - std_normal_cdf(z)).abs()).fold(0.0, f64::max))
}

pub fn exp_clt_error(spec: &CltSpec) -> Result<ConvergenceReport> {
    run(spec, &Sequential)
}

pub(crate) fn run(spec: &CltSpec, exec: &dyn Executor) -> Result<ConvergenceReport> {
    validate_grid(&spec.n_grid)?;
    if spec.z_points < 2 || !(spec.z_max > 0.0) {
        return Err(invalid("need at least two z-points on a positive range"));
    }
    if spec.summand.moment(3).map_or(true, |m| !m.is_finite()) {
        return Err(invalid("summand needs a finite third moment"));
    }
    let zs: Vec<f64> =
        (0..spec.z_points).map(|j| -spec.z_max + 2.0 * spec.z_max * j as f64 / (spec.z_points - 1) as f64).collect();
    let rows =
        sweep(exec, &spec.n_grid, &|n| Ok(vec![Row::new(n, "sup_error", sup_cdf_error(&spec.summand, n, &zs)?)]))?;
    let errs = series(&rows, "sup_error");
    let worst = errs.iter().map(|p| p.1).fold(0.0, f64::max);
    let exact = worst <= spec.exact_tol;
    let check = if exact {
        Check::new("exact_normal", true, format!("max error {worst:.3e} within {}", spec.exact_tol))
    } else {
        let slope = crate::fit::fit_loglog(&errs)?.slope;
        let (lo, hi) = spec.slope_band;
        Check::new(
            "slope_band",
            slope >= lo && slope <= hi,
            format!("fitted slope {slope:.4} against band [{lo}, {hi}]; sup_error {}", format_series(&errs)),
        )
    };
    let fit_points = if exact { Vec::new() } else { errs };
    Ok(finish("exp_clt_error", rows, "sup_error", "n", &fit_points, vec![check], vec![]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_slope() {
        let rep = exp_clt_error(&CltSpec::default()).unwrap();
        assert!(rep.passed(), "{:?}", rep.checks);
        assert!((rep.fitted_slope() + 0.5).abs() < 0.05);
    }

    #[test]
    fn normal_summands_are_exact() {
        let spec = CltSpec { summand: ContinuousDist::normal(0.3, 2.0).unwrap().into(), ..CltSpec::default() };
        let rep = exp_clt_error(&spec).unwrap();
        assert!(rep.passed());
        assert!(rep.series("sup_error").iter().all(|p| p.1 <= 1e-12));
        assert!(rep.fit.is_none());
    }

    #[test]
    fn poisson_uses_strict_inequality() {
        let p: Dist = crate::dist::DiscreteDist::poisson(1.0).unwrap().into();
        // T_1 = K - 1; P(T_1 < 0) = P(K = 0)
        let s = p.sum_law(1).unwrap();
        assert!((strict_cdf(&s, 1.0) - (-1.0f64).exp()).abs() < 1e-15);
        let rep = exp_clt_error(&CltSpec::poisson().unwrap()).unwrap();
        assert!(rep.passed(), "{:?}", rep.checks);
    }
}
