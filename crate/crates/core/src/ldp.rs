//! Cramér rate functions as Legendre–Fenchel conjugates of the log-MGF,
//! Legendre reciprocity, and the maximum-entropy tilt solver.
//!
//! Two sign conventions meet here. The log-MGF and the max-entropy weight
//! use `e^{+λx}`; every [`TiltParam`] produced by this module uses the
//! canonical `e^{-λx}`.

use alloc::sync::Arc;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::dist::{effective_range, ContinuousDist, Dist};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::quad::GridSpec;
use crate::roots::{bisect_boundary, bracket_increasing, newton_bisect};
use crate::tilting::{self, Provenance, TiltParam};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Source {
    Family(Dist),
    Explicit { phi: RealFn, dphi: RealFn, d2phi: RealFn },
}

/// `φ(y) = sup_λ [λy - A(λ)]` with its derivatives.
#[derive(Clone)]
pub struct RateFunction {
    source: Source,
    pub mean: f64,
    pub variance: f64,
    /// Open interval where `A` is finite.
    pub lambda_domain: (f64, f64),
    /// Open interval `(y₋, y₊)` where `φ` is finite.
    pub domain: (f64, f64),
}

impl core::fmt::Debug for RateFunction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("RateFunction")
            .field("mean", &self.mean)
            .field("variance", &self.variance)
            .field("lambda_domain", &self.lambda_domain)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

/// `A(λ) = ln E[e^{λX}]`.
pub fn log_mgf(dist: &Dist, lambda: f64) -> Result<f64> {
    dist.log_mgf(lambda)
}

/// Open interval where the MGF of `dist` is finite.
pub fn mgf_domain(dist: &Dist) -> (f64, f64) {
    match dist {
        Dist::Continuous(c) => c.mgf_domain(),
        Dist::Discrete(_) => (f64::NEG_INFINITY, f64::INFINITY),
    }
}

/// Locates where `a` stops being finite, starting from `0` in direction
/// `dir`, by doubling then bisecting to relative precision `1e-6`.
pub fn probe_mgf_boundary<F: Fn(f64) -> Result<f64>>(a: F, dir: f64) -> f64 {
    let ok = |t: f64| a(t).map(|v| v.is_finite()).unwrap_or(false);
    let mut inside = 0.0;
    let mut t = dir * 1e-3;
    for _ in 0..80 {
        if !ok(t) {
            let b = bisect_boundary(|s| ok(dir * s), inside * dir, t * dir, 1e-6);
            return dir * b;
        }
        inside = t;
        t *= 2.0;
    }
    dir * f64::INFINITY
}

fn open_hull(d: &Dist) -> (f64, f64) {
    d.bounds()
}

impl RateFunction {
    /// Rate function of a built-in family; needs `A` finite near `0`.
    pub fn of(dist: &Dist) -> Result<Self> {
        let lambda_domain = mgf_domain(dist);
        if !(lambda_domain.0 < 0.0 && lambda_domain.1 > 0.0) {
            return Err(Error::InvalidParameter("moment generating function must be finite near 0".into()));
        }
        let variance = dist.variance();
        if !(variance > 0.0) {
            return Err(Error::InvalidParameter("rate function needs a nondegenerate law".into()));
        }
        Ok(Self {
            source: Source::Family(dist.clone()),
            mean: dist.mean(),
            variance,
            lambda_domain,
            domain: open_hull(dist),
        })
    }

    /// A user-supplied `φ` with its first two derivatives.
    pub fn explicit(
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dphi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        mean: f64,
        variance: f64,
        domain: (f64, f64),
    ) -> Self {
        Self {
            source: Source::Explicit { phi: Arc::new(phi), dphi: Arc::new(dphi), d2phi: Arc::new(d2phi) },
            mean,
            variance,
            lambda_domain: (f64::NAN, f64::NAN),
            domain,
        }
    }

    /// `φ(y) = slope · y + intercept` on `domain`; its zero is reported as
    /// the mean.
    pub fn linear(slope: f64, intercept: f64, domain: (f64, f64)) -> Self {
        Self::explicit(
            move |y| slope * y + intercept,
            move |_| slope,
            |_| 0.0,
            -intercept / slope,
            f64::INFINITY,
            domain,
        )
    }

    fn family(&self) -> Result<&Dist> {
        match &self.source {
            Source::Family(d) => Ok(d),
            Source::Explicit { .. } => Err(Error::InvalidParameter("explicit rate function has no log-MGF".into())),
        }
    }

    pub fn log_mgf(&self, lambda: f64) -> Result<f64> {
        self.family()?.log_mgf(lambda)
    }

    /// Law proportional to `f(x) e^{λx}`.
    fn tilted(&self, lambda: f64) -> Result<Dist> {
        let d = self.family()?;
        if lambda == 0.0 {
            return Ok(d.clone());
        }
        let t = tilting::tilt_lambda(d, -lambda)?;
        t.law().cloned().ok_or(Error::NonFiniteSlope)
    }

    /// `A'(λ)`, the mean of the `e^{λx}`-tilted law.
    pub fn dlog_mgf(&self, lambda: f64) -> Result<f64> {
        Ok(self.tilted(lambda)?.mean())
    }

    /// `A''(λ)`, the variance of the `e^{λx}`-tilted law.
    pub fn d2log_mgf(&self, lambda: f64) -> Result<f64> {
        Ok(self.tilted(lambda)?.variance())
    }

    pub fn in_domain(&self, y: f64) -> bool {
        y > self.domain.0 && y < self.domain.1
    }

    /// `λ*(y)` solving `A'(λ) = y`, which is also `φ'(y)`.
    pub fn dphi(&self, y: f64) -> Result<f64> {
        if !self.in_domain(y) {
            return Err(Error::BoundarySupremum { y });
        }
        if let Source::Explicit { dphi, .. } = &self.source {
            return Ok(dphi(y));
        }
        if y == self.mean {
            return Ok(0.0);
        }
        let (lo, hi) = self.lambda_domain;
        let g = |l: f64| self.dlog_mgf(l).map(|m| m - y).unwrap_or(f64::NAN);
        let (a, b) = bracket_increasing(g, 0.0, lo, hi)?;
        newton_bisect(
            |l| match (self.dlog_mgf(l), self.d2log_mgf(l)) {
                (Ok(m), Ok(v)) => (m - y, v),
                _ => (f64::NAN, f64::NAN),
            },
            a,
            b,
            0.5 * (a + b),
        )
    }

    /// `φ(y)`; `+inf` outside the domain.
    pub fn phi(&self, y: f64) -> f64 {
        self.phi_checked(y).unwrap_or(f64::INFINITY)
    }

    pub fn phi_checked(&self, y: f64) -> Result<f64> {
        if !self.in_domain(y) {
            return Err(Error::BoundarySupremum { y });
        }
        match &self.source {
            Source::Explicit { phi, .. } => Ok(phi(y)),
            Source::Family(_) => {
                let l = self.dphi(y)?;
                Ok((l * y - self.log_mgf(l)?).max(0.0))
            }
        }
    }

    /// `φ''(y) = 1 / A''(φ'(y))`.
    pub fn d2phi(&self, y: f64) -> Result<f64> {
        if !self.in_domain(y) {
            return Err(Error::BoundarySupremum { y });
        }
        match &self.source {
            Source::Explicit { d2phi, .. } => Ok(d2phi(y)),
            Source::Family(_) => Ok(1.0 / self.d2log_mgf(self.dphi(y)?)?),
        }
    }

    /// `sup_y [λy - φ(y)]`, computed from `φ` alone.
    pub fn conjugate_of_phi(&self, lambda: f64) -> Result<f64> {
        let (lo, hi) = self.domain;
        let start = self.mean;
        let g = |y: f64| self.dphi(y).map(|d| d - lambda).unwrap_or(f64::NAN);
        let (a, b) = bracket_increasing(g, start, lo, hi)?;
        let y = newton_bisect(
            |y| match (self.dphi(y), self.d2phi(y)) {
                (Ok(d), Ok(dd)) => (d - lambda, dd),
                _ => (f64::NAN, f64::NAN),
            },
            a,
            b,
            0.5 * (a + b),
        )?;
        Ok(lambda * y - self.phi_checked(y)?)
    }

    /// Rows `(y, φ, φ', φ'')` for export.
    pub fn table(&self, ys: &[f64]) -> Vec<[f64; 4]> {
        ys.iter()
            .map(|&y| [y, self.phi(y), self.dphi(y).unwrap_or(f64::NAN), self.d2phi(y).unwrap_or(f64::NAN)])
            .collect()
    }
}

pub fn rate_function(dist: &Dist) -> Result<RateFunction> {
    RateFunction::of(dist)
}

/// Residuals of the reciprocal equations at `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reciprocity {
    pub lambda: f64,
    /// `|A'(φ'(y)) - y|`.
    pub r1: f64,
    /// `|φ'(A'(λ)) - λ|` with `λ = φ'(y)`.
    pub r2: f64,
}

pub fn reciprocity_check(rf: &RateFunction, y: f64) -> Result<Reciprocity> {
    let lambda = rf.dphi(y)?;
    let y2 = rf.dlog_mgf(lambda)?;
    let r1 = (y2 - y).abs();
    let r2 = (rf.dphi(y2)? - lambda).abs();
    Ok(Reciprocity { lambda, r1, r2 })
}

/// Canonical tilt at large-deviation scale: `λ = -φ'(y*)` with `y*` the
/// endpoint of `I` nearest the mean. Windows right of the mean give
/// `λ < 0`.
pub fn ldp_tilt_param(rf: &RateFunction, i: &Interval) -> Result<TiltParam> {
    let (lo, hi) = (i.lo(), i.hi());
    if rf.mean > lo && rf.mean < hi {
        return Err(Error::MeanInsideWindow { mean: rf.mean });
    }
    let y_star = if rf.mean >= hi { hi } else { lo };
    for y in [lo, hi] {
        if !rf.in_domain(y) {
            return Err(Error::BoundarySupremum { y });
        }
    }
    let lambda = -rf.dphi(y_star)?;
    let mut p = TiltParam::new(lambda, Provenance::RateFunction, *i, 1.0);
    if rf.mean <= lo && y_star == lo && lambda != 0.0 {
        p.note = Some("window right of the mean".into());
    }
    Ok(p)
}

pub fn y_star(rf: &RateFunction, i: &Interval) -> f64 {
    if rf.mean >= i.hi() {
        i.hi()
    } else {
        i.lo()
    }
}

/// Solution of `∫ x e^{λx} f / c(λ) = α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxEntSolution {
    pub lambda: f64,
    pub constraint_mean: f64,
    pub c_lambda: f64,
    pub residual: f64,
}

/// `(ln c(λ), mean, variance)` of `f(x) e^{λx}` by direct summation or
/// quadrature of the base law.
pub fn direct_tilted_moments(dist: &Dist, lambda: f64) -> Result<(f64, f64, f64)> {
    let (xs, ln_w): (Vec<f64>, Vec<f64>) = match dist {
        Dist::Discrete(d) => {
            // the tilted law only selects which support points to sum
            let t = tilting::tilt_lambda(dist, -lambda)?;
            let pts = match t.law() {
                Some(Dist::Discrete(l)) => l.enumerate(),
                _ => d.enumerate(),
            };
            pts.iter()
                .map(|(k, _)| {
                    let x = d.position(*k);
                    (x, d.ln_pmf(*k) + lambda * x)
                })
                .unzip()
        }
        Dist::Continuous(c) => {
            let (dlo, dhi) = c.mgf_domain();
            if !(lambda > dlo && lambda < dhi) {
                return Err(Error::DivergentMgf { lambda, lower: dlo, upper: dhi });
            }
            let ln_g = |x: f64| c.ln_pdf(x) + lambda * x;
            let (m, s) = (c.mean(), c.variance().sqrt());
            let r = effective_range(ln_g, c.support(), m + lambda * s * s, s)?;
            let mut spec = GridSpec::new(r.lo, r.hi, 256, 16).with_breakpoints(&[c.support().0, c.support().1]);
            if let ContinuousDist::Tabulated(t) = c {
                spec = spec.with_breakpoints(t.xs());
            }
            let g = spec.build();
            g.nodes.iter().zip(&g.weights).map(|(&x, &w)| (x, ln_g(x) + w.ln())).unzip()
        }
    };
    let m = ln_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return Err(Error::DivergentMgf { lambda, lower: f64::NAN, upper: f64::NAN });
    }
    let ws: Vec<f64> = ln_w.iter().map(|l| (l - m).exp()).collect();
    let s0: f64 = ws.iter().sum();
    let mean = xs.iter().zip(&ws).map(|(x, w)| x * w).sum::<f64>() / s0;
    let var = xs.iter().zip(&ws).map(|(x, w)| (x - mean) * (x - mean) * w).sum::<f64>() / s0;
    Ok((s0.ln() + m, mean, var))
}

/// Maximum-entropy weight `e^{λx}` matching the mean `α`.
pub fn maxent_lambda(dist: &Dist, alpha: f64) -> Result<MaxEntSolution> {
    let (lower, upper) = open_hull(dist);
    if !(alpha > lower && alpha < upper) {
        return Err(Error::InfeasibleMean { alpha, lower, upper });
    }
    let (dlo, dhi) = mgf_domain(dist);
    let mean_at = |l: f64| direct_tilted_moments(dist, l);
    let lambda = if alpha == dist.mean() {
        0.0
    } else {
        let g = |l: f64| mean_at(l).map(|(_, m, _)| m - alpha).unwrap_or(f64::NAN);
        let (a, b) = bracket_increasing(g, 0.0, dlo, dhi)?;
        newton_bisect(
            |l| match mean_at(l) {
                Ok((_, m, v)) => (m - alpha, v),
                Err(_) => (f64::NAN, f64::NAN),
            },
            a,
            b,
            0.5 * (a + b),
        )?
    };
    let (ln_c, m, _) = mean_at(lambda)?;
    Ok(MaxEntSolution { lambda, constraint_mean: alpha, c_lambda: ln_c.exp(), residual: (m - alpha).abs() })
}

/// `|λ_maxent(y*) - (-λ_ldp)|`: the max-entropy weight `e^{λx}` against
/// the canonical weight `e^{-λx}`.
pub fn maxent_ldp_equivalence(dist: &Dist, i: &Interval) -> Result<f64> {
    let rf = RateFunction::of(dist)?;
    let p = ldp_tilt_param(&rf, i)?;
    let sol = maxent_lambda(dist, y_star(&rf, i))?;
    Ok((sol.lambda + p.lambda).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DiscreteDist;

    fn expo() -> Dist {
        ContinuousDist::exponential(1.0).unwrap().into()
    }

    fn normal(v: f64) -> Dist {
        ContinuousDist::normal(0.0, v).unwrap().into()
    }

    #[test]
    fn log_mgf_examples() {
        assert_eq!(log_mgf(&expo(), 0.0).unwrap(), 0.0);
        assert!((log_mgf(&expo(), 0.5).unwrap() - core::f64::consts::LN_2).abs() < 1e-15);
        let (lc, _, _) = direct_tilted_moments(&normal(1.0), 1.3).unwrap();
        assert!((log_mgf(&normal(1.0), 1.3).unwrap() - 0.5 * 1.69).abs() < 1e-15);
        assert!((lc - 0.5 * 1.69).abs() < 1e-10);
        assert!(matches!(log_mgf(&expo(), 1.0), Err(Error::DivergentMgf { upper, .. }) if upper == 1.0));
        let b = probe_mgf_boundary(|t| log_mgf(&expo(), t), 1.0);
        assert!((b - 1.0).abs() < 1e-6);
        assert_eq!(probe_mgf_boundary(|t| log_mgf(&normal(1.0), t), -1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn conjugates_match_closed_forms() {
        let rf = RateFunction::of(&expo()).unwrap();
        for &y in &[0.2, 0.5, 1.0, 2.0, 4.0] {
            assert!((rf.phi(y) - (y - 1.0 - y.ln())).abs() < 1e-12, "y={y}");
        }
        assert_eq!(rf.phi(1.0), 0.0);
        assert_eq!(rf.phi(-1.0), f64::INFINITY);
        assert!(matches!(rf.phi_checked(0.0), Err(Error::BoundarySupremum { .. })));
        let s2 = 2.5;
        let rn = RateFunction::of(&normal(s2)).unwrap();
        for &y in &[-3.0, -0.5, 0.7, 2.0] {
            assert!((rn.phi(y) - y * y / (2.0 * s2)).abs() < 1e-12);
        }
        assert!((rf.d2phi(1.0).unwrap() - 1.0).abs() < 1e-6);
        assert!((rn.d2phi(0.0).unwrap() * s2 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn reciprocity_examples() {
        let rf = RateFunction::of(&expo()).unwrap();
        let r = reciprocity_check(&rf, 1.0).unwrap();
        assert_eq!(r.lambda, 0.0);
        assert!(r.r1 < 1e-10 && r.r2 < 1e-10);
        let r = reciprocity_check(&rf, 0.5).unwrap();
        assert!((r.lambda + 1.0).abs() < 1e-10);
        assert!(r.r1 < 1e-10 && r.r2 < 1e-10);
        let rn = RateFunction::of(&normal(1.0)).unwrap();
        let r = reciprocity_check(&rn, 2.0).unwrap();
        assert!((r.lambda - 2.0).abs() < 1e-10 && r.r1 < 1e-10 && r.r2 < 1e-10);
    }

    #[test]
    fn ldp_params() {
        let rf = RateFunction::of(&expo()).unwrap();
        let p = ldp_tilt_param(&rf, &Interval::from_endpoints(0.4, 0.5).unwrap()).unwrap();
        assert!((p.lambda - 1.0).abs() < 1e-10);
        assert_eq!(p.provenance, Provenance::RateFunction);
        let rn = RateFunction::of(&normal(1.0)).unwrap();
        let p = ldp_tilt_param(&rn, &Interval::from_endpoints(1.0, 2.0).unwrap()).unwrap();
        assert!((p.lambda + 1.0).abs() < 1e-10);
        let pt = ldp_tilt_param(&rf, &Interval::new(0.3, 0.0).unwrap()).unwrap();
        assert_eq!(pt.lambda, -rf.dphi(0.3).unwrap());
        assert!(matches!(
            ldp_tilt_param(&rf, &Interval::from_endpoints(0.5, 1.5).unwrap()),
            Err(Error::MeanInsideWindow { .. })
        ));
    }

    #[test]
    fn maxent_examples() {
        let s = maxent_lambda(&expo(), 1.0).unwrap();
        assert_eq!(s.lambda, 0.0);
        let s = maxent_lambda(&expo(), 0.5).unwrap();
        assert!((s.lambda + 1.0).abs() < 1e-10 && s.residual <= 1e-10);
        assert!((s.c_lambda - 0.5).abs() < 1e-10);
        let s = maxent_lambda(&normal(1.0), 1.0).unwrap();
        assert!((s.lambda - 1.0).abs() < 1e-10);
        assert!(matches!(maxent_lambda(&expo(), -0.1), Err(Error::InfeasibleMean { .. })));
        let p: Dist = DiscreteDist::poisson(2.0).unwrap().into();
        let s = maxent_lambda(&p, 5.0).unwrap();
        assert!((s.lambda - (2.5f64).ln()).abs() < 1e-10);
    }

    #[test]
    fn equivalence_examples() {
        let e = maxent_ldp_equivalence(&expo(), &Interval::from_endpoints(0.4, 0.5).unwrap()).unwrap();
        assert!(e < 1e-8);
        let e = maxent_ldp_equivalence(&normal(1.0), &Interval::from_endpoints(1.0, 2.0).unwrap()).unwrap();
        assert!(e < 1e-8);
        let e = maxent_ldp_equivalence(&expo(), &Interval::from_endpoints(1.0, 1.5).unwrap()).unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn linear_rate_function() {
        let rf = RateFunction::linear(-2.0, 3.0, (f64::NEG_INFINITY, f64::INFINITY));
        for h in [-1.0, -0.5, 0.2] {
            let p = ldp_tilt_param(&rf, &Interval::new(h, 0.1).unwrap()).unwrap();
            assert_eq!(p.lambda, 2.0);
        }
    }

    #[test]
    fn double_conjugate() {
        let rf = RateFunction::of(&expo()).unwrap();
        for &l in &[-2.0, -0.5, 0.3, 0.8] {
            let a = rf.conjugate_of_phi(l).unwrap();
            assert!((a - rf.log_mgf(l).unwrap()).abs() < 1e-6, "l={l}");
        }
    }
}
