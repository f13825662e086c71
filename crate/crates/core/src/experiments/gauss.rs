//! Gaussian-fluctuation regime: scaled divergence of the canonical law at
//! temperature `√n / ψ`, against deliberately mis-set temperatures.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::{
    finish, format_series, series, sweep, temperature, validate_grid, Check, ConvergenceReport, Executor, Row,
    Sequential, HYPOTHESIS_NOTE,
};
use crate::conditioning::{canonical_approx, finite_n_conditional};
use crate::dist::{BathFamily, ContinuousDist, Dist};
use crate::divergence::scaled_divergence;
use crate::error::{invalid, Result};
use crate::interval::{Interval, ScalingScheme};
use crate::tilting::{bath_slope_param, log_interval_prob_slope};

#[derive(Debug, Clone)]
pub struct GaussSpec {
    pub n_grid: Vec<u64>,
    pub seed: u64,
    /// Common law of the subsystem and of each bath summand.
    pub summand: Dist,
    pub window: Interval,
    /// Multipliers applied to the correct `λ` for the contrast curves.
    pub factors: Vec<f64>,
    /// Perturbed curves must exceed the correct one from this `n` on.
    pub compare_from: u64,
}

impl Default for GaussSpec {
    fn default() -> Self {
        Self {
            n_grid: vec![25, 100, 400, 1600],
            seed: 0,
            summand: ContinuousDist::Exponential { rate: 1.0 }.into(),
            window: Interval { h: -1.0, delta: 0.5 },
            factors: vec![0.75, 1.25],
            compare_from: 100,
        }
    }
}

pub fn exp_gauss_temperature(spec: &GaussSpec) -> Result<ConvergenceReport> {
    run(spec, &Sequential)
}

fn metric(factor: f64) -> String {
    if factor == 1.0 {
        "scaled_kl".into()
    } else {
        format!("scaled_kl_x{factor}")
    }
}

pub(crate) fn run(spec: &GaussSpec, exec: &dyn Executor) -> Result<ConvergenceReport> {
    validate_grid(&spec.n_grid)?;
    if spec.factors.iter().any(|&f| !(f > 0.0) || f == 1.0) {
        return Err(invalid("perturbation factors must be positive and differ from 1"));
    }
    let x = spec.summand.clone();
    let (mean, var) = (x.mean(), x.variance());
    if !(var > 0.0) || !var.is_finite() || !mean.is_finite() {
        return Err(invalid("summand needs finite mean and positive variance"));
    }
    let limit = ContinuousDist::normal(0.0, var)?;
    let i = spec.window;
    let bath = BathFamily::iid_sum(x.clone(), -1);
    let scheme = ScalingScheme::gaussian(mean, 1)?;

    let rows = sweep(exec, &spec.n_grid, &|n| {
        let cond = finite_n_conditional(&x, &bath, &scheme, &i, n)?;
        let beta = scheme.at(n)?.beta();
        let param = bath_slope_param(&limit, &i, beta)?;
        let scale = n as f64;
        let mut out = Vec::new();
        let canon = canonical_approx(&x, &param)?;
        let rep = scaled_divergence(&canon, &cond, scale)?;
        out.push(Row::new(n, "scaled_kl", rep.scaled_kl));
        out.push(Row::new(n, "kl", rep.kl));
        out.push(Row::new(n, "tv", rep.tv));
        out.push(Row::new(n, "outside_mass", rep.outside_mass_p));
        out.push(Row::new(n, "lambda", param.lambda));
        out.push(Row::new(n, "temperature", temperature(param.lambda)));
        for &f in &spec.factors {
            let p = param.scaled(f);
            let c = canonical_approx(&x, &p)?;
            out.push(Row::new(n, &metric(f), scaled_divergence(&c, &cond, scale)?.scaled_kl));
        }
        Ok(out)
    })?;

    let correct = series(&rows, "scaled_kl");
    let mut checks = vec![Check::new(
        "correct_decreasing",
        super::strictly_decreasing(&correct),
        format!("n·KL {}", format_series(&correct)),
    )];
    for &f in &spec.factors {
        let m = metric(f);
        let pert = series(&rows, &m);
        let ok = pert.iter().zip(&correct).filter(|(p, _)| p.0 as u64 >= spec.compare_from).all(|(p, c)| p.1 > c.1);
        checks.push(Check::new(&format!("dominates_{m}"), ok, format!("{m} {}", format_series(&pert))));
    }
    let notes = vec![String::from(HYPOTHESIS_NOTE), format!("psi = {}", log_interval_prob_slope(&limit, &i)?)];
    Ok(finish("exp_gauss_temperature", rows, "scaled_kl", "n", &correct, checks, notes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_for_unit_variance() {
        let n01 = ContinuousDist::normal(0.0, 1.0).unwrap();
        let psi = log_interval_prob_slope(&n01, &Interval::new(-1.0, 0.5).unwrap()).unwrap();
        assert!((psi - 0.7345404588412985).abs() < 1e-9);
    }

    #[test]
    fn rejects_unit_factor() {
        let spec = GaussSpec { factors: vec![1.0], ..GaussSpec::default() };
        assert!(exp_gauss_temperature(&spec).is_err());
    }

    #[test]
    fn default_sweep_passes() {
        let rep = exp_gauss_temperature(&GaussSpec::default()).unwrap();
        assert!(rep.passed(), "{:?}", rep.checks);
        assert_eq!(rep.series("scaled_kl_x0.75").len(), 4);
        let psi: f64 = rep.notes[1].trim_start_matches("psi = ").parse().unwrap();
        assert!((psi - 0.7345404588412985).abs() < 1e-9);
    }
}
