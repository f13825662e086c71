//! Poisson subsystem against a Poisson bath: sup-distance decay of the
//! canonical approximation.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::{
    finish, format_series, series, sweep, temperature, validate_grid, Check, ConvergenceReport, Executor, Row,
    Sequential,
};
use crate::conditioning::{canonical_approx, finite_n_conditional};
use crate::dist::{BathFamily, ContinuousDist, DiscreteDist, Dist};
use crate::divergence::{scaled_divergence, sup_distance};
use crate::error::{Error, Result};
use crate::interval::{Interval, ScalingScheme};
use crate::tilting::{bath_slope_param, log_interval_prob_slope};

#[derive(Debug, Clone, PartialEq)]
pub struct PoissonSpec {
    pub n_grid: Vec<u64>,
    pub seed: u64,
    /// Mean of the subsystem `X ~ Pois(subsystem_mean)`.
    pub subsystem_mean: f64,
    /// Per-unit bath mean: `Y_n ~ Pois(n · bath_mean)`.
    pub bath_mean: f64,
    pub window: Interval,
    pub slope_band: (f64, f64),
}

impl Default for PoissonSpec {
    fn default() -> Self {
        Self {
            n_grid: vec![64, 256, 1024, 4096],
            seed: 0,
            subsystem_mean: 1.0,
            bath_mean: 1.0,
            window: Interval { h: -1.0, delta: 0.2 },
            slope_band: (-0.65, -0.35),
        }
    }
}

pub fn exp_poisson_rate(spec: &PoissonSpec) -> Result<ConvergenceReport> {
    run(spec, &Sequential)
}

pub(crate) fn run(spec: &PoissonSpec, exec: &dyn Executor) -> Result<ConvergenceReport> {
    validate_grid(&spec.n_grid)?;
    let x: Dist = DiscreteDist::poisson(spec.subsystem_mean)?.into();
    let limit = ContinuousDist::normal(0.0, spec.bath_mean)?;
    let i = spec.window;
    let psi = log_interval_prob_slope(&limit, &i)?;
    // local monotonicity of the limiting density across the window
    if !(2.0 * i.delta / spec.bath_mean < psi) {
        return Err(Error::HypothesisViolated(format!(
            "need 2δ/σ² < ψ(I), got 2δ/σ² = {} and ψ(I) = {psi}",
            2.0 * i.delta / spec.bath_mean
        )));
    }
    let mu = spec.bath_mean;
    let bath = BathFamily::Custom(Arc::new(move |n| Ok(DiscreteDist::poisson(n as f64 * mu)?.into())));
    let scheme = ScalingScheme::gaussian(mu, 1)?;

    let rows = sweep(exec, &spec.n_grid, &|n| {
        let cond = finite_n_conditional(&x, &bath, &scheme, &i, n)?;
        let beta = scheme.at(n)?.beta();
        let param = bath_slope_param(&limit, &i, beta)?;
        let canon = canonical_approx(&x, &param)?;
        let sup = sup_distance(&canon, &cond)?;
        let rep = scaled_divergence(&canon, &cond, 1.0)?;
        Ok(vec![
            Row::new(n, "sup_dist", sup),
            Row::new(n, "tv", rep.tv),
            Row::new(n, "kl", rep.kl),
            Row::new(n, "pinsker_bound", rep.pinsker_bound),
            Row::new(n, "lambda", param.lambda),
            Row::new(n, "temperature", temperature(param.lambda)),
        ])
    })?;

    let sups = series(&rows, "sup_dist");
    let fit = crate::fit::fit_loglog(&sups)?;
    let (lo, hi) = spec.slope_band;
    let checks = vec![
        Check::new("hypothesis", true, format!("2δ/σ² = {} < ψ(I) = {psi}", 2.0 * i.delta / spec.bath_mean)),
        Check::new(
            "slope_band",
            fit.slope >= lo && fit.slope <= hi,
            format!("fitted slope {:.4} against band [{lo}, {hi}]; sup_dist {}", fit.slope, format_series(&sups)),
        ),
    ];
    let notes = vec![format!("psi = {psi}")];
    Ok(finish("exp_poisson_rate", rows, "sup_dist", "n", &sups, checks, notes))
}
