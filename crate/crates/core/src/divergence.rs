//! KL divergence, total variation and sup-distance between laws evaluated
//! on a shared grid (continuous) or shared support (discrete).

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::dist::{ContinuousDist, DiscreteDist, Dist};
use crate::error::{Error, Result};
use crate::quad::{Grid, GridSpec};
use crate::tilting::TiltedDist;

/// Where a law wants to be compared.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    Grid(Grid),
    /// Sorted support positions of a discrete law.
    Points(Vec<f64>),
}

/// A comparison support; authoritative supports (exact conditionals,
/// histograms) take precedence over analytic defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct LawSupport {
    pub support: Support,
    pub authoritative: bool,
}

/// Anything with a log density (continuous) or log pmf at a position
/// (discrete).
pub trait Law {
    fn is_discrete_law(&self) -> bool;
    fn ln_density_at(&self, x: f64) -> f64;
    fn comparison_support(&self) -> Result<LawSupport>;
}

const DEFAULT_PANELS: usize = 256;
const DEFAULT_ORDER: usize = 16;

pub(crate) fn continuous_support(c: &ContinuousDist) -> Result<LawSupport> {
    if !c.has_density() {
        return Err(Error::GridMismatch);
    }
    let (lo, hi) = c.effective_range()?;
    let mut spec = GridSpec::new(lo, hi, DEFAULT_PANELS, DEFAULT_ORDER);
    if let ContinuousDist::Tabulated(t) = c {
        if t.xs().len() <= 4096 {
            spec = spec.with_breakpoints(t.xs());
        }
    }
    Ok(LawSupport { support: Support::Grid(spec.build()), authoritative: false })
}

pub(crate) fn discrete_support(d: &DiscreteDist) -> LawSupport {
    let mut pts: Vec<f64> = d.enumerate().into_iter().map(|(k, _)| d.position(k)).collect();
    pts.sort_by(f64::total_cmp);
    LawSupport { support: Support::Points(pts), authoritative: false }
}

impl Law for ContinuousDist {
    fn is_discrete_law(&self) -> bool {
        false
    }
    fn ln_density_at(&self, x: f64) -> f64 {
        self.ln_pdf(x)
    }
    fn comparison_support(&self) -> Result<LawSupport> {
        continuous_support(self)
    }
}

impl Law for DiscreteDist {
    fn is_discrete_law(&self) -> bool {
        true
    }
    fn ln_density_at(&self, x: f64) -> f64 {
        self.ln_pmf_at(x)
    }
    fn comparison_support(&self) -> Result<LawSupport> {
        Ok(discrete_support(self))
    }
}

impl Law for Dist {
    fn is_discrete_law(&self) -> bool {
        self.is_discrete()
    }
    fn ln_density_at(&self, x: f64) -> f64 {
        match self {
            Dist::Continuous(c) => c.ln_pdf(x),
            Dist::Discrete(d) => d.ln_pmf_at(x),
        }
    }
    fn comparison_support(&self) -> Result<LawSupport> {
        match self {
            Dist::Continuous(c) => continuous_support(c),
            Dist::Discrete(d) => Ok(discrete_support(d)),
        }
    }
}

impl Law for TiltedDist {
    fn is_discrete_law(&self) -> bool {
        self.is_discrete()
    }
    fn ln_density_at(&self, x: f64) -> f64 {
        self.ln_density(x)
    }
    fn comparison_support(&self) -> Result<LawSupport> {
        if let Some(l) = self.law() {
            return l.comparison_support();
        }
        let (nodes, _) = self.field_memo().ok_or(Error::GridMismatch)?;
        if self.is_discrete() {
            let mut pts = nodes.to_vec();
            pts.sort_by(f64::total_cmp);
            return Ok(LawSupport { support: Support::Points(pts), authoritative: false });
        }
        // the memo grid is the one the normalizer was computed on
        let lo = nodes.first().copied().ok_or(Error::GridMismatch)?;
        let hi = nodes.last().copied().ok_or(Error::GridMismatch)?;
        match self.base() {
            Dist::Continuous(c) => {
                let (a, b) = c.effective_range()?;
                Ok(LawSupport {
                    support: Support::Grid(GridSpec::new(a.min(lo), b.max(hi), DEFAULT_PANELS, DEFAULT_ORDER).build()),
                    authoritative: false,
                })
            }
            Dist::Discrete(_) => Err(Error::GridMismatch),
        }
    }
}

impl<T: Law + ?Sized> Law for &T {
    fn is_discrete_law(&self) -> bool {
        (**self).is_discrete_law()
    }
    fn ln_density_at(&self, x: f64) -> f64 {
        (**self).ln_density_at(x)
    }
    fn comparison_support(&self) -> Result<LawSupport> {
        (**self).comparison_support()
    }
}

fn merge_specs(a: &GridSpec, b: &GridSpec) -> GridSpec {
    let mut bps = a.breakpoints.clone();
    bps.extend_from_slice(&b.breakpoints);
    bps.extend_from_slice(&[a.lo, a.hi, b.lo, b.hi]);
    GridSpec::new(a.lo.min(b.lo), a.hi.max(b.hi), a.panels.max(b.panels), a.order.max(b.order)).with_breakpoints(&bps)
}

/// The support both laws are evaluated on.
pub fn shared_support<P: Law + ?Sized, Q: Law + ?Sized>(p: &P, q: &Q) -> Result<Support> {
    if p.is_discrete_law() != q.is_discrete_law() {
        return Err(Error::GridMismatch);
    }
    let sp = p.comparison_support()?;
    let sq = q.comparison_support()?;
    match (sp.authoritative, sq.authoritative) {
        (true, _) => return Ok(sp.support),
        (false, true) => return Ok(sq.support),
        _ => {}
    }
    match (sp.support, sq.support) {
        (Support::Grid(a), Support::Grid(b)) => Ok(Support::Grid(merge_specs(&a.spec, &b.spec).build())),
        (Support::Points(mut a), Support::Points(b)) => {
            a.extend(b);
            a.sort_by(f64::total_cmp);
            a.dedup();
            Ok(Support::Points(a))
        }
        _ => Err(Error::GridMismatch),
    }
}

/// Nonnegative KL term `p ln(p/q) - p + q` from log values.
fn kl_term(lp: f64, lq: f64) -> f64 {
    if lp == f64::NEG_INFINITY {
        return lq.exp();
    }
    if lq == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    let p = lp.exp();
    let r = lp - lq;
    if r > -1.0 {
        p * (r + (-r).exp_m1())
    } else {
        p * r - p + lq.exp()
    }
}

fn weighted_points(s: &Support) -> (&[f64], Option<&[f64]>) {
    match s {
        Support::Grid(g) => (&g.nodes, Some(&g.weights)),
        Support::Points(p) => (p, None),
    }
}

fn kl_on<P: Law + ?Sized, Q: Law + ?Sized>(p: &P, q: &Q, s: &Support) -> f64 {
    let (xs, ws) = weighted_points(s);
    let mut total = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let t = kl_term(p.ln_density_at(x), q.ln_density_at(x));
        if t == f64::INFINITY {
            return t;
        }
        total += ws.map_or(1.0, |w| w[i]) * t;
    }
    total.max(0.0)
}

/// `KL(P‖Q)` evaluated on a caller-chosen support.
pub fn kl_on_support<P: Law + ?Sized, Q: Law + ?Sized>(p: &P, q: &Q, s: &Support) -> f64 {
    kl_on(p, q, s)
}

/// `KL(P‖Q)`; `+inf` when `P` has mass where `Q` has none.
pub fn kl<P: Law + ?Sized, Q: Law + ?Sized>(p: &P, q: &Q) -> Result<f64> {
    let s = shared_support(p, q)?;
    Ok(kl_on(p, q, &s))
}

/// Adds panel edges where the two densities cross, so `|p - q|` is
/// smooth on every panel.
fn with_crossings<P: Law + ?Sized, Q: Law + ?Sized>(p: &P, q: &Q, g: &Grid) -> Grid {
    let diff = |x: f64| {
        let a = p.ln_density_at(x);
        let b = q.ln_density_at(x);
        if a == b {
            0.0
        } else {
            a.exp() - b.exp()
        }
    };
    let mut cross = Vec::new();
    let vals: Vec<f64> = g.nodes.iter().map(|&x| diff(x)).collect();
    for i in 1..g.nodes.len() {
        if vals[i - 1] * vals[i] < 0.0 {
            let (mut a, mut b) = (g.nodes[i - 1], g.nodes[i]);
            let sa = vals[i - 1].signum();
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if diff(m).signum() == sa {
                    a = m;
                } else {
                    b = m;
                }
            }
            cross.push(0.5 * (a + b));
            if cross.len() > 64 {
                return g.clone();
            }
        }
    }
    if cross.is_empty() {
        return g.clone();
    }
    g.spec.clone().with_breakpoints(&cross).build()
}

fn tv_on<P: Law + ?Sized, Q: Law + ?Sized>(p: &P, q: &Q, s: &Support) -> f64 {
    let (xs, ws) = weighted_points(s);
    let mut total = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let d = (p.ln_density_at(x).exp() - q.ln_density_at(x).exp()).abs();
        total += ws.map_or(1.0, |w| w[i]) * d;
    }
    (0.5 * total).clamp(0.0, 1.0)
}

/// Half the L¹ distance between the densities or pmfs.
pub fn total_variation<P: Law + ?Sized, Q: Law + ?Sized>(p: &P, q: &Q) -> Result<f64> {
    let s = match shared_support(p, q)? {
        Support::Grid(g) => Support::Grid(with_crossings(p, q, &g)),
        s => s,
    };
    Ok(tv_on(p, q, &s))
}

/// `sup_k |P(k) - Q(k)|` over the shared discrete support.
pub fn sup_distance<P: Law + ?Sized, Q: Law + ?Sized>(p: &P, q: &Q) -> Result<f64> {
    if !p.is_discrete_law() || !q.is_discrete_law() {
        return Err(Error::GridMismatch);
    }
    match shared_support(p, q)? {
        Support::Points(xs) => {
            Ok(xs.iter().map(|&x| (p.ln_density_at(x).exp() - q.ln_density_at(x).exp()).abs()).fold(0.0, f64::max))
        }
        Support::Grid(_) => Err(Error::GridMismatch),
    }
}

fn mass_on<P: Law + ?Sized>(p: &P, s: &Support) -> f64 {
    let (xs, ws) = weighted_points(s);
    xs.iter().enumerate().map(|(i, &x)| ws.map_or(1.0, |w| w[i]) * p.ln_density_at(x).exp()).sum()
}

/// Divergences of one pair, with `scaled_kl = scale · kl`.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceReport {
    pub kl: f64,
    pub tv: f64,
    pub sup_dist: Option<f64>,
    pub pinsker_bound: f64,
    pub scale: f64,
    pub scaled_kl: f64,
    /// `1 -` mass of each law on the comparison support.
    pub outside_mass_p: f64,
    pub outside_mass_q: f64,
}

impl DivergenceReport {
    pub fn pinsker_holds(&self) -> bool {
        self.tv <= self.pinsker_bound + 1e-12
    }
}

pub fn divergence_report<P: Law + ?Sized, Q: Law + ?Sized>(p: &P, q: &Q) -> Result<DivergenceReport> {
    scaled_divergence(p, q, 1.0)
}

/// Full report for one pair; fails if Pinsker's inequality is violated.
pub fn scaled_divergence<P: Law + ?Sized, Q: Law + ?Sized>(p: &P, q: &Q, scale: f64) -> Result<DivergenceReport> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidParameter("divergence scale must be positive".into()));
    }
    let s = shared_support(p, q)?;
    let kl = kl_on(p, q, &s);
    let (tv, sup_dist) = match &s {
        Support::Grid(g) => (tv_on(p, q, &Support::Grid(with_crossings(p, q, g))), None),
        Support::Points(_) => (tv_on(p, q, &s), Some(sup_distance(p, q)?)),
    };
    let pinsker_bound = (kl / 2.0).sqrt();
    let report = DivergenceReport {
        kl,
        tv,
        sup_dist,
        pinsker_bound,
        scale,
        scaled_kl: scale * kl,
        outside_mass_p: (1.0 - mass_on(p, &s)).max(0.0),
        outside_mass_q: (1.0 - mass_on(q, &s)).max(0.0),
    };
    if !report.pinsker_holds() {
        return Err(Error::HypothesisViolated(alloc::format!(
            "tv {} exceeds sqrt(kl/2) = {}",
            report.tv,
            report.pinsker_bound
        )));
    }
    Ok(report)
}

/// `Σ p ln(p/q)` for pmf vectors on the same support.
pub fn kl_pmf(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let t = kl_term(a.ln(), b.ln());
        if t == f64::INFINITY {
            return t;
        }
        total += t;
    }
    total.max(0.0)
}

pub fn tv_pmf(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Sums adjacent cells; `cuts` are the start indices of each merged cell
/// after the first.
pub fn merge_bins(p: &[f64], cuts: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut start = 0;
    for &c in cuts.iter().chain(core::iter::once(&p.len())) {
        let c = c.clamp(start, p.len());
        out.push(p[start..c].iter().sum());
        start = c;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;

    #[test]
    fn kl_examples() {
        let n0 = ContinuousDist::normal(0.0, 1.0).unwrap();
        let n1 = ContinuousDist::normal(1.0, 1.0).unwrap();
        assert_eq!(kl(&n0, &n0).unwrap(), 0.0);
        assert!((kl(&n0, &n1).unwrap() - 0.5).abs() < 1e-12);
        let p1 = DiscreteDist::poisson(1.0).unwrap();
        let p2 = DiscreteDist::poisson(2.0).unwrap();
        assert!((kl(&p1, &p2).unwrap() - (1.0 - core::f64::consts::LN_2)).abs() < 1e-13);
    }

    #[test]
    fn tv_examples() {
        let b0 = DiscreteDist::bernoulli(0.0).unwrap();
        let b1 = DiscreteDist::bernoulli(1.0).unwrap();
        assert_eq!(total_variation(&b0, &b1).unwrap(), 1.0);
        assert_eq!(kl(&b0, &b1).unwrap(), f64::INFINITY);
        let e1 = ContinuousDist::exponential(1.0).unwrap();
        let e2 = ContinuousDist::exponential(2.0).unwrap();
        assert_eq!(total_variation(&e1, &e1).unwrap(), 0.0);
        let tol = quad::QuadTol::new(1e-15, 1e-14);
        let d = |x: f64| 0.5 * ((-x).exp() - 2.0 * (-2.0 * x).exp()).abs();
        let ln2 = core::f64::consts::LN_2;
        let oracle = quad::integrate(d, 0.0, ln2, tol).unwrap().value
            + quad::integrate(d, ln2, f64::INFINITY, tol).unwrap().value;
        assert!((total_variation(&e1, &e2).unwrap() - oracle).abs() < 1e-8);
    }

    #[test]
    fn sup_examples() {
        let p = DiscreteDist::poisson(1.0).unwrap();
        let q = DiscreteDist::poisson(1.01).unwrap();
        assert_eq!(sup_distance(&p, &p).unwrap(), 0.0);
        let mut oracle = 0.0f64;
        let (mut a, mut b) = ((-1.0f64).exp(), (-1.01f64).exp());
        for k in 0..40 {
            if k > 0 {
                a *= 1.0 / k as f64;
                b *= 1.01 / k as f64;
            }
            oracle = oracle.max((a - b).abs());
        }
        assert!((sup_distance(&p, &q).unwrap() - oracle).abs() < 1e-14);
        let d0 = DiscreteDist::point(0);
        let d1 = DiscreteDist::point(1);
        assert_eq!(sup_distance(&d0, &d1).unwrap(), 1.0);
        let c = ContinuousDist::exponential(1.0).unwrap();
        assert!(matches!(sup_distance(&c, &c), Err(Error::GridMismatch)));
        assert!(matches!(kl(&c, &p), Err(Error::GridMismatch)));
    }

    #[test]
    fn scaled_reports() {
        let p = ContinuousDist::normal(0.0, 1.0).unwrap();
        let q = ContinuousDist::normal(0.3, 1.2).unwrap();
        let r1 = scaled_divergence(&p, &q, 1.0).unwrap();
        assert_eq!(r1.scaled_kl, r1.kl);
        let r = scaled_divergence(&p, &q, 7.0).unwrap();
        assert_eq!(r.scaled_kl, 7.0 * r.kl);
        assert!(r.sup_dist.is_none());
        assert!(scaled_divergence(&p, &q, 0.0).is_err());
    }

    #[test]
    fn merging_sums_cells() {
        assert_eq!(merge_bins(&[0.1, 0.2, 0.3, 0.4], &[1, 3]), alloc::vec![0.1, 0.5, 0.4]);
    }
}
