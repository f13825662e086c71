//! Convergence experiments: each builds exact finite-`n` conditionals and
//! their canonical approximations across an `n`-grid, records divergences
//! and fits decay rates.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fit::{fit_loglog, LogLogFit};

pub mod clt;
pub mod gauss;
pub mod gibbs;
pub mod heatbath;
pub mod ldp_temp;
pub mod poisson;

pub use clt::{exp_clt_error, CltSpec};
pub use gauss::{exp_gauss_temperature, GaussSpec};
pub use gibbs::{exp_gibbs_phase, GibbsSpec, PhaseSpaceModel};
pub use heatbath::{exp_heatbath_invariance, exponential_form_bath, subinterval_spread, HeatBathSpec};
pub use ldp_temp::{exp_ldp_temperature, LdpSpec};
pub use poisson::{exp_poisson_rate, PoissonSpec};

/// One `(n, metric, value)` observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub n: u64,
    pub metric: String,
    pub value: f64,
}

impl Row {
    pub fn new(n: u64, metric: &str, value: f64) -> Self {
        Self { n, metric: metric.to_string(), value }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

/// A named pass/fail condition with a human-readable detail.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.to_string(), passed, detail }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub experiment: String,
    pub rows: Vec<Row>,
    /// Metric that was fitted, and the abscissa it was fitted against.
    pub fit_metric: String,
    pub fit_against: String,
    pub fit: Option<LogLogFit>,
    pub verdict: Verdict,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl ConvergenceReport {
    pub fn fitted_slope(&self) -> f64 {
        self.fit.map_or(f64::NAN, |f| f.slope)
    }

    pub fn slope_stderr(&self) -> f64 {
        self.fit.map_or(f64::NAN, |f| f.slope_stderr)
    }

    pub fn r2(&self) -> f64 {
        self.fit.map_or(f64::NAN, |f| f.r2)
    }

    /// Values of one metric, ordered as recorded.
    pub fn series(&self, metric: &str) -> Vec<(u64, f64)> {
        self.rows.iter().filter(|r| r.metric == metric).map(|r| (r.n, r.value)).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

type Job<'a> = dyn Fn(usize) -> Result<Vec<Row>> + Sync + 'a;

/// Runs the per-`n` tasks of a sweep; results come back in task order.
pub trait Executor: Sync {
    fn run(&self, tasks: usize, job: &Job<'_>) -> Vec<Result<Vec<Row>>>;
}

/// Runs tasks one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn run(&self, tasks: usize, job: &Job<'_>) -> Vec<Result<Vec<Row>>> {
        (0..tasks).map(job).collect()
    }
}

pub(crate) fn sweep(
    exec: &dyn Executor,
    n_grid: &[u64],
    job: &(dyn Fn(u64) -> Result<Vec<Row>> + Sync),
) -> Result<Vec<Row>> {
    let results = exec.run(n_grid.len(), &|i| job(n_grid[i]));
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

pub(crate) fn validate_grid(n_grid: &[u64]) -> Result<()> {
    if n_grid.len() < 4 {
        return Err(Error::InvalidParameter("n_grid needs at least 4 entries".into()));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) || n_grid[0] == 0 {
        return Err(Error::InvalidParameter("n_grid must be strictly increasing and positive".into()));
    }
    Ok(())
}

pub(crate) fn series(rows: &[Row], metric: &str) -> Vec<(f64, f64)> {
    rows.iter().filter(|r| r.metric == metric).map(|r| (r.n as f64, r.value)).collect()
}

pub(crate) fn strictly_decreasing(v: &[(f64, f64)]) -> bool {
    v.windows(2).all(|w| w[1].1 < w[0].1)
}

pub(crate) fn temperature(lambda: f64) -> f64 {
    if lambda == 0.0 {
        f64::INFINITY
    } else {
        1.0 / lambda
    }
}

pub(crate) fn format_series(v: &[(f64, f64)]) -> String {
    let parts: Vec<String> = v.iter().map(|(n, x)| alloc::format!("{n}:{x:.6e}")).collect();
    parts.join(", ")
}

/// Builds a report from rows and checks; the verdict passes when every
/// check does.
pub(crate) fn finish(
    experiment: &str,
    rows: Vec<Row>,
    fit_metric: &str,
    fit_against: &str,
    fit_points: &[(f64, f64)],
    checks: Vec<Check>,
    notes: Vec<String>,
) -> ConvergenceReport {
    let fit = fit_loglog(fit_points).ok();
    let verdict = if checks.iter().all(|c| c.passed) { Verdict::Pass } else { Verdict::Fail };
    ConvergenceReport {
        experiment: experiment.to_string(),
        rows,
        fit_metric: fit_metric.to_string(),
        fit_against: fit_against.to_string(),
        fit,
        verdict,
        checks,
        notes,
    }
}

pub(crate) const HYPOTHESIS_NOTE: &str =
    "remainder hypotheses are not computable; the run checks the limiting conclusion and its uniqueness contrast";

/// Any experiment, by name.
#[derive(Debug, Clone)]
pub enum ExperimentSpec {
    Poisson(PoissonSpec),
    Gauss(GaussSpec),
    Ldp(LdpSpec),
    Gibbs(GibbsSpec),
    HeatBath(HeatBathSpec),
    Clt(CltSpec),
}

pub const EXPERIMENT_NAMES: [&str; 6] = [
    "exp_poisson_rate",
    "exp_gauss_temperature",
    "exp_ldp_temperature",
    "exp_gibbs_phase",
    "exp_heatbath_invariance",
    "exp_clt_error",
];

impl ExperimentSpec {
    /// Default spec of the named experiment.
    pub fn default_for(name: &str) -> Option<Self> {
        Some(match name {
            "exp_poisson_rate" => Self::Poisson(PoissonSpec::default()),
            "exp_gauss_temperature" => Self::Gauss(GaussSpec::default()),
            "exp_ldp_temperature" => Self::Ldp(LdpSpec::default()),
            "exp_gibbs_phase" => Self::Gibbs(GibbsSpec::default()),
            "exp_heatbath_invariance" => Self::HeatBath(HeatBathSpec::default()),
            "exp_clt_error" => Self::Clt(CltSpec::default()),
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Poisson(_) => EXPERIMENT_NAMES[0],
            Self::Gauss(_) => EXPERIMENT_NAMES[1],
            Self::Ldp(_) => EXPERIMENT_NAMES[2],
            Self::Gibbs(_) => EXPERIMENT_NAMES[3],
            Self::HeatBath(_) => EXPERIMENT_NAMES[4],
            Self::Clt(_) => EXPERIMENT_NAMES[5],
        }
    }

    pub fn run(&self, exec: &dyn Executor) -> Result<ConvergenceReport> {
        match self {
            Self::Poisson(s) => poisson::run(s, exec),
            Self::Gauss(s) => gauss::run(s, exec),
            Self::Ldp(s) => ldp_temp::run(s, exec),
            Self::Gibbs(s) => gibbs::run(s, exec),
            Self::HeatBath(s) => heatbath::run(s, exec),
            Self::Clt(s) => clt::run(s, exec),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(validate_grid(&[1, 2, 3, 4]).is_ok());
        assert!(validate_grid(&[1, 2, 3]).is_err());
        assert!(validate_grid(&[1, 3, 2, 4]).is_err());
    }

    #[test]
    fn names_round_trip() {
        for name in EXPERIMENT_NAMES {
            assert_eq!(ExperimentSpec::default_for(name).unwrap().name(), name);
        }
        assert!(ExperimentSpec::default_for("nope").is_none());
    }

    #[test]
    fn temperature_guard() {
        assert_eq!(temperature(0.0), f64::INFINITY);
        assert_eq!(temperature(0.5), 2.0);
    }
}
