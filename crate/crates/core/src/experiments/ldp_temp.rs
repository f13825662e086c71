//! Large-deviation regime: the canonical temperature read off the rate
//! function, with a mis-set contrast and the max-entropy cross-check.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::{
    finish, format_series, series, strictly_decreasing, sweep, temperature, validate_grid, Check, ConvergenceReport,
    Executor, Row, Sequential, HYPOTHESIS_NOTE,
};
use crate::conditioning::{canonical_approx, finite_n_conditional};
use crate::dist::{BathFamily, ContinuousDist, Dist};
use crate::divergence::scaled_divergence;
use crate::error::Result;
use crate::interval::{Interval, ScalingScheme};
use crate::ldp::{ldp_tilt_param, maxent_ldp_equivalence, RateFunction};
use crate::tilting::TiltParam;

#[derive(Debug, Clone)]
pub struct LdpSpec {
    pub n_grid: Vec<u64>,
    pub seed: u64,
    pub summand: Dist,
    pub window: Interval,
    /// Deliberately wrong `λ` for the contrast curve.
    pub misspecified_lambda: f64,
    /// Ceiling on the KL at the largest `n`.
    pub kl_tol: f64,
    /// Minimal ratio `KL(mis-set) / KL(correct)` at every `n`.
    pub contrast: f64,
    pub equivalence_tol: f64,
}

impl Default for LdpSpec {
    fn default() -> Self {
        Self {
            n_grid: vec![25, 50, 100, 200],
            seed: 0,
            summand: ContinuousDist::Exponential { rate: 1.0 }.into(),
            window: Interval { h: 0.4, delta: 0.1 },
            misspecified_lambda: 0.5,
            kl_tol: 1e-2,
            contrast: 5.0,
            equivalence_tol: 1e-8,
        }
    }
}

pub fn exp_ldp_temperature(spec: &LdpSpec) -> Result<ConvergenceReport> {
    run(spec, &Sequential)
}

pub(crate) fn run(spec: &LdpSpec, exec: &dyn Executor) -> Result<ConvergenceReport> {
    validate_grid(&spec.n_grid)?;
    let x = spec.summand.clone();
    let i = spec.window;
    let rf = RateFunction::of(&x)?;
    let param = ldp_tilt_param(&rf, &i)?;
    let wrong = TiltParam::user(spec.misspecified_lambda, i);
    let bath = BathFamily::iid_sum(x.clone(), -1);
    let scheme = ScalingScheme::large_deviation(1)?;

    let rows = sweep(exec, &spec.n_grid, &|n| {
        let cond = finite_n_conditional(&x, &bath, &scheme, &i, n)?;
        let canon = canonical_approx(&x, &param)?;
        let rep = scaled_divergence(&canon, &cond, 1.0)?;
        let mis = scaled_divergence(&canonical_approx(&x, &wrong)?, &cond, 1.0)?;
        Ok(vec![
            Row::new(n, "kl", rep.kl),
            Row::new(n, "tv", rep.tv),
            Row::new(n, "outside_mass", rep.outside_mass_p),
            Row::new(n, "kl_misspecified", mis.kl),
            Row::new(n, "lambda", param.lambda),
            Row::new(n, "temperature", temperature(param.lambda)),
        ])
    })?;

    let kl = series(&rows, "kl");
    let mis = series(&rows, "kl_misspecified");
    let last = kl.last().map_or(f64::NAN, |p| p.1);
    let ratio = kl.iter().zip(&mis).map(|(c, m)| m.1 / c.1).fold(f64::INFINITY, f64::min);
    let equiv = maxent_ldp_equivalence(&x, &i)?;
    let checks = vec![
        Check::new("kl_decreasing", strictly_decreasing(&kl), format!("KL {}", format_series(&kl))),
        Check::new("kl_small", last < spec.kl_tol, format!("KL at largest n = {last:.3e}, tolerance {}", spec.kl_tol)),
        Check::new(
            "misspecified_contrast",
            ratio >= spec.contrast,
            format!("min KL ratio {ratio:.3} against {}; mis-set KL {}", spec.contrast, format_series(&mis)),
        ),
        Check::new("maxent_equivalence", equiv < spec.equivalence_tol, format!("|λ_maxent + λ| = {equiv:.3e}")),
    ];
    let mut notes = vec![String::from(HYPOTHESIS_NOTE), format!("lambda = {}", param.lambda)];
    if let Some(n) = &param.note {
        notes.push(n.clone());
    }
    Ok(finish("exp_ldp_temperature", rows, "kl", "n", &kl, checks, notes))
}
