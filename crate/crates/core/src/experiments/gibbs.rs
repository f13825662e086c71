//! Quadratic-energy phase-space model: a small subsystem of dimension `k`
//! in contact with a bath of dimension `m`, conditioned on a total-energy
//! shell.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::{
    finish, format_series, sweep, temperature, validate_grid, Check, ConvergenceReport, Executor, Row, Sequential,
};
use crate::conditioning::{canonical_approx, condition_exact};
use crate::dist::{ContinuousDist, Dist};
use crate::error::{invalid, Result};
use crate::interval::Interval;
use crate::quad::{integrate, QuadTol};
use crate::tilting::{log_interval_prob_slope, Provenance, TiltParam};

/// Phase space `V = U × W` with standard normal base measure and energies
/// `e₁(u) = Σ u_i²`, `e₂(w) = Σ w_j²`; the subsystem energy is scaled by
/// `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceModel {
    pub k: u32,
    pub m: u32,
    pub beta: f64,
}

impl PhaseSpaceModel {
    pub fn new(k: u32, m: u32, beta: f64) -> Result<Self> {
        if k == 0 || m == 0 || !(beta > 0.0) || !beta.is_finite() {
            return Err(invalid("phase-space model needs k, m >= 1 and beta > 0"));
        }
        Ok(Self { k, m, beta })
    }

    pub fn e1(&self, u: &[f64]) -> f64 {
        u.iter().map(|v| v * v).sum()
    }

    pub fn e2(&self, w: &[f64]) -> f64 {
        w.iter().map(|v| v * v).sum()
    }

    /// Energy of the full point `v = (u, w)`, `u` the first `k` coordinates.
    pub fn e(&self, v: &[f64]) -> f64 {
        let (u, w) = v.split_at((self.k as usize).min(v.len()));
        self.e1(u) + self.e2(w)
    }

    /// Law of `X = β e₁(U)`: a scaled chi-square with `k` degrees.
    pub fn subsystem(&self) -> Result<ContinuousDist> {
        ContinuousDist::gamma(0.5 * self.k as f64, 0.5 / self.beta)
    }

    /// Bath structure function `Γ`: the chi-square(`m`) density.
    pub fn bath(&self) -> Result<ContinuousDist> {
        ContinuousDist::gamma(0.5 * self.m as f64, 0.5)
    }

    /// `ε = E[X²]^{1/2}`.
    pub fn epsilon(&self) -> f64 {
        let k = self.k as f64;
        self.beta * (k * k + 2.0 * k).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsSpec {
    pub n_grid: Vec<u64>,
    pub seed: u64,
    pub k: u32,
    /// Bath dimension per unit of `n`: `m = bath_per_n · n`.
    pub bath_per_n: u32,
    pub window: Interval,
    pub test_sets: usize,
    /// Lowest accepted slope of `ln sup_err` against `ln ε`.
    pub slope_min: f64,
    /// Exponential reweighting of both structure functions.
    pub alpha: f64,
    pub irrelevance_delta: f64,
    pub irrelevance_tol: f64,
    pub oracle_tol: f64,
}

impl Default for GibbsSpec {
    fn default() -> Self {
        Self {
            n_grid: vec![16, 32, 64, 128, 256],
            seed: 0,
            k: 2,
            bath_per_n: 1,
            window: Interval { h: 1.0, delta: 0.5 },
            test_sets: 50,
            slope_min: 0.9,
            alpha: 0.5,
            irrelevance_delta: 1e-3,
            irrelevance_tol: 1e-3,
            oracle_tol: 1e-6,
        }
    }
}

pub fn exp_gibbs_phase(spec: &GibbsSpec) -> Result<ConvergenceReport> {
    run(spec, &Sequential)
}

fn model_at(spec: &GibbsSpec, n: u64) -> Result<PhaseSpaceModel> {
    PhaseSpaceModel::new(spec.k, spec.bath_per_n * n as u32, 1.0 / n as f64)
}

/// Max relative gap between the closed-form tilted density and a
/// quadrature of `γ(x) e^{-ψx}`, sampled across the bulk.
fn oracle_gap(gamma: &ContinuousDist, psi: f64, canon: &ContinuousDist) -> Result<f64> {
    let (_, hi) = canon.effective_range()?;
    let top = hi.max(gamma.effective_range()?.1.min(hi * 4.0));
    let z = integrate(|x| (gamma.ln_pdf(x) - psi * x).exp(), 0.0, top, QuadTol::new(0.0, 1e-13))?.value;
    let mut gap: f64 = 0.0;
    for j in 1..=20 {
        let x = canon.quantile(j as f64 / 21.0);
        let want = (gamma.ln_pdf(x) - psi * x).exp() / z;
        gap = gap.max((canon.pdf(x) - want).abs() / want);
    }
    Ok(gap)
}

/// Sup-density gap between the canonical laws recovered from the original
/// and from the `e^{-αs}`-reweighted structure functions.
fn irrelevance_gap(model: &PhaseSpaceModel, i: &Interval, alpha: f64) -> Result<f64> {
    let b = model.bath()?;
    let (ks, kr) = (0.5 * model.k as f64, 0.5 / model.beta);
    let (ms, mr) = (0.5 * model.m as f64, 0.5);
    let psi = log_interval_prob_slope(&b, i)?;
    let psi_a = log_interval_prob_slope(&ContinuousDist::gamma(ms, mr + alpha)?, i)?;
    let direct = ContinuousDist::gamma(ks, kr + psi)?;
    let via = ContinuousDist::gamma(ks, kr + alpha + psi_a)?;
    let (_, hi) = direct.effective_range()?;
    let mut gap: f64 = 0.0;
    for j in 0..=400 {
        let x = hi * j as f64 / 400.0;
        gap = gap.max((direct.pdf(x) - via.pdf(x)).abs());
    }
    Ok(gap)
}

pub(crate) fn run(spec: &GibbsSpec, exec: &dyn Executor) -> Result<ConvergenceReport> {
    validate_grid(&spec.n_grid)?;
    if spec.test_sets == 0 {
        return Err(invalid("need at least one test set"));
    }
    let i = spec.window;
    if i.lo() < 0.0 {
        return Err(invalid("energy shell must lie in [0, ∞)"));
    }
    let small = Interval::new(i.h, spec.irrelevance_delta)?;

    let rows = sweep(exec, &spec.n_grid, &|n| {
        let model = model_at(spec, n)?;
        let gamma = model.subsystem()?;
        let bath = model.bath()?;
        let psi = log_interval_prob_slope(&bath, &i)?;
        let x: Dist = gamma.clone().into();
        let cond = condition_exact(&x, &bath.clone().into(), &i)?;
        let canon = canonical_approx(&x, &TiltParam::new(psi, Provenance::BathSlope, i, 1.0))?;
        let canon = match canon.law() {
            Some(Dist::Continuous(c)) => c.clone(),
            _ => return Err(invalid("tilted chi-square has no closed form")),
        };
        let q: Vec<f64> =
            (1..=spec.test_sets).map(|j| canon.quantile(j as f64 / (spec.test_sets + 1) as f64)).collect();
        let mut edges = vec![0.0];
        edges.extend_from_slice(&q);
        let masses = cond.bin_masses(&edges);
        let mut acc = 0.0;
        let mut err: f64 = 0.0;
        for (j, m) in masses.iter().enumerate() {
            acc += m;
            err = err.max((acc - canon.cdf(q[j])).abs());
        }
        Ok(vec![
            Row::new(n, "sup_err", err),
            Row::new(n, "eps", model.epsilon()),
            Row::new(n, "psi", psi),
            Row::new(n, "beta_psi", model.beta * psi),
            Row::new(n, "temperature", temperature(psi)),
            Row::new(n, "bath_mode", (model.m as f64 - 2.0).max(0.0)),
            Row::new(n, "oracle_gap", oracle_gap(&gamma, psi, &canon)?),
            Row::new(n, "irrelevance_gap", irrelevance_gap(&model, &small, spec.alpha)?),
        ])
    })?;

    let pick = |m: &str| -> Vec<f64> { rows.iter().filter(|r| r.metric == m).map(|r| r.value).collect() };
    let (errs, eps) = (pick("sup_err"), pick("eps"));
    let pts: Vec<(f64, f64)> = eps.iter().copied().zip(errs.iter().copied()).collect();
    let fit = crate::fit::fit_loglog(&pts)?;
    let modes = pick("bath_mode");
    let oracle = pick("oracle_gap").into_iter().fold(0.0, f64::max);
    let irr = pick("irrelevance_gap").into_iter().fold(0.0, f64::max);
    let checks = vec![
        Check::new(
            "bath_increasing",
            modes.iter().all(|&mode| mode >= i.hi()),
            format!("Γ nondecreasing on I needs chi-square mode ≥ {}; smallest mode {}", i.hi(), modes[0]),
        ),
        Check::new(
            "slope_vs_eps",
            fit.slope >= spec.slope_min,
            format!(
                "slope of sup_err against ε: {:.4} (minimum {}); (ε, err) {}",
                fit.slope,
                spec.slope_min,
                format_series(&pts)
            ),
        ),
        Check::new("canonical_oracle", oracle < spec.oracle_tol, format!("max relative gap {oracle:.3e}")),
        Check::new(
            "prior_irrelevance",
            irr < spec.irrelevance_tol,
            format!("α = {}, δ = {}: sup-density gap {irr:.3e}", spec.alpha, spec.irrelevance_delta),
        ),
    ];
    Ok(finish("exp_gibbs_phase", rows, "sup_err", "eps", &pts, checks, vec![]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;

    #[test]
    fn energies_are_additive() {
        let m = PhaseSpaceModel::new(2, 3, 0.1).unwrap();
        let v = [0.5, -1.0, 2.0, 0.25, -0.75];
        assert_eq!(m.e(&v), m.e1(&v[..2]) + m.e2(&v[2..]));
        assert!(m.e1(&v[..2]) >= 0.0 && m.e2(&v[2..]) >= 0.0);
    }

    #[test]
    fn psi_is_the_explicit_ratio() {
        let b = PhaseSpaceModel::new(2, 16, 1.0 / 16.0).unwrap().bath().unwrap();
        let i = Interval::new(1.0, 0.5).unwrap();
        let psi = log_interval_prob_slope(&b, &i).unwrap();
        let mass = integrate(|y| b.pdf(y), 1.0, 1.5, QuadTol::new(0.0, 1e-14)).unwrap().value;
        let want = (b.pdf(1.5) - b.pdf(1.0)) / mass;
        assert!((psi - want).abs() < 1e-10 * want.abs());
    }

    #[test]
    fn canonical_is_tilted_chi_square() {
        for n in [16u64, 64, 256] {
            let model = PhaseSpaceModel::new(2, n as u32, 1.0 / n as f64).unwrap();
            let g = model.subsystem().unwrap();
            let psi = log_interval_prob_slope(&model.bath().unwrap(), &Interval::new(1.0, 0.5).unwrap()).unwrap();
            let t = crate::tilting::tilt_lambda(&g.clone().into(), psi).unwrap();
            let c = match t.law() {
                Some(Dist::Continuous(c)) => c.clone(),
                _ => panic!(),
            };
            assert!(oracle_gap(&g, psi, &c).unwrap() < 1e-6);
        }
    }

    #[test]
    fn reweighting_leaves_the_canonical_law() {
        let model = PhaseSpaceModel::new(2, 32, 1.0 / 32.0).unwrap();
        let gap = irrelevance_gap(&model, &Interval::new(1.0, 1e-3).unwrap(), 0.5).unwrap();
        assert!(gap < 1e-3, "{gap}");
    }

    #[test]
    fn default_sweep_passes() {
        let rep = exp_gibbs_phase(&GibbsSpec::default()).unwrap();
        assert!(rep.passed(), "{:?}", rep.checks);
        assert_eq!(rep.fit_against, "eps");
    }
}
