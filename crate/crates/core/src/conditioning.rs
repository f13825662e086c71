//! Conditional law of `X` given `X + Y ∈ I`: exact Bayes evaluation on a
//! grid or support, and a brute-force rejection sampler.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dist::{effective_range, BathFamily, ContinuousDist, DiscreteDist, Dist, LN_CUTOFF};
use crate::divergence::{Law, LawSupport, Support};
use crate::error::{Error, Result};
use crate::interval::{Interval, ScalingScheme};
use crate::quad::{Grid, GridSpec};
use crate::special::log_add_exp;
use crate::tilting::{self, TiltField, TiltParam, TiltedDist};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawKind {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    BayesExact,
    McRejection,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::BayesExact => "bayes-exact",
            Method::McRejection => "mc-rejection",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McMeta {
    pub samples: u64,
    pub accepted: u64,
    pub seed: u64,
}

/// Finite-`n` context of a conditional built from a scaling scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteN {
    pub n: u64,
    pub beta: f64,
    pub mu: f64,
    /// `E_n`, the window the sum was actually conditioned on.
    pub window: Interval,
}

type ProbFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
type DrawFn = Arc<dyn Fn(f64, &mut dyn RngCore) -> f64 + Send + Sync>;

/// `P(Y ∈ [lo, hi] | X = x)`, optionally with a sampler for `Y | X = x`.
#[derive(Clone)]
pub struct ConditionalBath {
    prob: ProbFn,
    sampler: Option<DrawFn>,
}

impl core::fmt::Debug for ConditionalBath {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ConditionalBath").field("sampler", &self.sampler.is_some()).finish_non_exhaustive()
    }
}

impl ConditionalBath {
    pub fn new(prob: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { prob: Arc::new(prob), sampler: None }
    }

    pub fn with_sampler(mut self, draw: impl Fn(f64, &mut dyn RngCore) -> f64 + Send + Sync + 'static) -> Self {
        self.sampler = Some(Arc::new(draw));
        self
    }

    /// A bath that ignores `x`.
    pub fn independent(y: Dist) -> Self {
        let ys = y.clone();
        Self::new(move |_, lo, hi| y.prob_between(lo, hi)).with_sampler(move |_, rng| draw_one(&ys, rng))
    }

    pub fn prob(&self, x: f64, lo: f64, hi: f64) -> f64 {
        (self.prob)(x, lo, hi)
    }
}

/// The bath in a conditioning problem.
#[derive(Debug, Clone)]
pub enum Bath {
    Independent(Dist),
    Dependent(ConditionalBath),
}

impl From<Dist> for Bath {
    fn from(d: Dist) -> Self {
        Bath::Independent(d)
    }
}

impl From<ConditionalBath> for Bath {
    fn from(b: ConditionalBath) -> Self {
        Bath::Dependent(b)
    }
}

type LnFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Grid { grid: Grid, ln_dens: Vec<f64>, ln_num: LnFn },
    Points { xs: Vec<f64>, pmf: Vec<f64> },
    Histogram { edges: Vec<f64>, dens: Vec<f64>, stderr: Vec<f64> },
    PointHistogram { xs: Vec<f64>, pmf: Vec<f64>, stderr: Vec<f64> },
}

/// The conditional law of `X` given `X + Y ∈ I`.
#[derive(Clone)]
pub struct ConditionalLaw {
    pub window: Interval,
    pub method: Method,
    pub mass_in_window: f64,
    pub ln_mass_in_window: f64,
    pub mc_meta: Option<McMeta>,
    pub finite_n: Option<FiniteN>,
    repr: Repr,
}

impl core::fmt::Debug for ConditionalLaw {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ConditionalLaw")
            .field("kind", &self.kind())
            .field("window", &self.window)
            .field("method", &self.method)
            .field("mass_in_window", &self.mass_in_window)
            .field("mc_meta", &self.mc_meta)
            .field("finite_n", &self.finite_n)
            .finish_non_exhaustive()
    }
}

/// One output row: position, density (or pmf) and, for histograms, its
/// standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawRow {
    pub x: f64,
    pub density: f64,
    pub stderr: Option<f64>,
}

fn find_point(xs: &[f64], x: f64) -> Option<usize> {
    xs.binary_search_by(|v| v.total_cmp(&x)).ok()
}

impl ConditionalLaw {
    pub fn kind(&self) -> LawKind {
        match self.repr {
            Repr::Grid { .. } | Repr::Histogram { .. } => LawKind::Continuous,
            Repr::Points { .. } | Repr::PointHistogram { .. } => LawKind::Discrete,
        }
    }

    pub fn grid(&self) -> Option<&Grid> {
        match &self.repr {
            Repr::Grid { grid, .. } => Some(grid),
            _ => None,
        }
    }

    /// Histogram bin edges (continuous Monte Carlo laws).
    pub fn edges(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Histogram { edges, .. } => Some(edges),
            _ => None,
        }
    }

    /// Support points with their masses (discrete laws).
    pub fn points(&self) -> Option<(&[f64], &[f64])> {
        match &self.repr {
            Repr::Points { xs, pmf } | Repr::PointHistogram { xs, pmf, .. } => Some((xs, pmf)),
            _ => None,
        }
    }

    pub fn ln_density(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::Grid { ln_num, .. } => {
                let v = ln_num(x);
                if v.is_nan() {
                    f64::NEG_INFINITY
                } else {
                    v - self.ln_mass_in_window
                }
            }
            Repr::Points { xs, pmf } | Repr::PointHistogram { xs, pmf, .. } => {
                find_point(xs, x).map_or(f64::NEG_INFINITY, |i| pmf[i].ln())
            }
            Repr::Histogram { edges, dens, .. } => match bin_of(edges, x) {
                Some(b) => dens[b].ln(),
                None => f64::NEG_INFINITY,
            },
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        self.ln_density(x).exp()
    }

    pub fn total_mass(&self) -> f64 {
        match &self.repr {
            Repr::Grid { grid, ln_dens, .. } => grid.weights.iter().zip(ln_dens).map(|(w, l)| w * l.exp()).sum(),
            Repr::Points { pmf, .. } | Repr::PointHistogram { pmf, .. } => pmf.iter().sum(),
            Repr::Histogram { edges, dens, .. } => edges.windows(2).zip(dens).map(|(e, d)| (e[1] - e[0]) * d).sum(),
        }
    }

    pub fn mean(&self) -> f64 {
        match &self.repr {
            Repr::Grid { grid, ln_dens, .. } => {
                grid.nodes.iter().zip(&grid.weights).zip(ln_dens).map(|((x, w), l)| x * w * l.exp()).sum()
            }
            Repr::Points { xs, pmf } | Repr::PointHistogram { xs, pmf, .. } => {
                xs.iter().zip(pmf).map(|(x, p)| x * p).sum()
            }
            Repr::Histogram { edges, dens, .. } => {
                edges.windows(2).zip(dens).map(|(e, d)| 0.5 * (e[0] + e[1]) * (e[1] - e[0]) * d).sum()
            }
        }
    }

    /// Rows for tabular export (grid nodes, support points or bin centres).
    pub fn rows(&self) -> Vec<LawRow> {
        match &self.repr {
            Repr::Grid { grid, ln_dens, .. } => {
                grid.nodes.iter().zip(ln_dens).map(|(&x, l)| LawRow { x, density: l.exp(), stderr: None }).collect()
            }
            Repr::Points { xs, pmf } => {
                xs.iter().zip(pmf).map(|(&x, &p)| LawRow { x, density: p, stderr: None }).collect()
            }
            Repr::PointHistogram { xs, pmf, stderr } => xs
                .iter()
                .zip(pmf.iter().zip(stderr))
                .map(|(&x, (&p, &s))| LawRow { x, density: p, stderr: Some(s) })
                .collect(),
            Repr::Histogram { edges, dens, stderr } => edges
                .windows(2)
                .zip(dens.iter().zip(stderr))
                .map(|(e, (&d, &s))| LawRow { x: 0.5 * (e[0] + e[1]), density: d, stderr: Some(s) })
                .collect(),
        }
    }

    /// Mass of each cell `[e_j, e_{j+1})` (the last cell closed).
    pub fn bin_masses(&self, edges: &[f64]) -> Vec<f64> {
        let cells = edges.len().saturating_sub(1);
        match &self.repr {
            Repr::Grid { grid, .. } => (0..cells)
                .map(|j| {
                    let (a, b) = (edges[j], edges[j + 1]);
                    if !(b > a) {
                        return 0.0;
                    }
                    let g = GridSpec::new(a, b, 4, 16).with_breakpoints(&grid.spec.breakpoints).build();
                    g.integrate(|x| self.density(x))
                })
                .collect(),
            Repr::Points { xs, pmf } | Repr::PointHistogram { xs, pmf, .. } => {
                let mut out = vec![0.0; cells];
                for (&x, &p) in xs.iter().zip(pmf) {
                    if let Some(b) = bin_of(edges, x) {
                        out[b] += p;
                    }
                }
                out
            }
            Repr::Histogram { edges: own, dens, .. } => (0..cells)
                .map(|j| {
                    let (a, b) = (edges[j], edges[j + 1]);
                    own.windows(2).zip(dens).map(|(e, d)| d * (e[1].min(b) - e[0].max(a)).max(0.0)).sum()
                })
                .collect(),
        }
    }
}

fn bin_of(edges: &[f64], x: f64) -> Option<usize> {
    let n = edges.len();
    if n < 2 || !(x >= edges[0] && x <= edges[n - 1]) {
        return None;
    }
    let i = edges.partition_point(|&e| e <= x);
    Some(i.saturating_sub(1).min(n - 2))
}

impl Law for ConditionalLaw {
    fn is_discrete_law(&self) -> bool {
        self.kind() == LawKind::Discrete
    }
    fn ln_density_at(&self, x: f64) -> f64 {
        self.ln_density(x)
    }
    fn comparison_support(&self) -> Result<LawSupport> {
        let support = match &self.repr {
            Repr::Grid { grid, .. } => Support::Grid(grid.clone()),
            Repr::Points { xs, .. } | Repr::PointHistogram { xs, .. } => Support::Points(xs.clone()),
            Repr::Histogram { edges, .. } => {
                let n = edges.len();
                Support::Grid(GridSpec::new(edges[0], edges[n - 1], 1, 2).with_breakpoints(edges).build())
            }
        };
        Ok(LawSupport { support, authoritative: true })
    }
}

fn ln_sum_exp(ws: &[f64], vs: &[f64]) -> f64 {
    let m = vs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    let s: f64 = vs.iter().zip(ws).map(|(v, w)| w * (v - m).exp()).sum();
    s.ln() + m
}

/// Shrinks `[lo, hi]` to where `ln_f` is within [`LN_CUTOFF`] of its peak.
fn trim_range(ln_f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<(f64, f64)> {
    const SCAN: usize = 4096;
    let mut found = false;
    for _ in 0..4 {
        let step = (hi - lo) / SCAN as f64;
        let vals: Vec<f64> = (0..=SCAN).map(|j| ln_f(lo + step * j as f64)).collect();
        let m = vals.iter().copied().filter(|v| !v.is_nan()).fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return if found { Some((lo, hi)) } else { None };
        }
        found = true;
        let keep = |v: &f64| *v >= m - LN_CUTOFF;
        let first = vals.iter().position(keep).unwrap_or(0);
        let last = vals.iter().rposition(keep).unwrap_or(SCAN);
        let (a, b) = (first.saturating_sub(1), (last + 1).min(SCAN));
        let (nlo, nhi) = (lo + step * a as f64, lo + step * b as f64);
        let shrunk = (nhi - nlo) < 0.125 * (hi - lo);
        lo = nlo;
        hi = nhi;
        if !shrunk {
            break;
        }
    }
    Some((lo, hi))
}

const PANELS: usize = 128;
const ORDER: usize = 16;
const MAX_KINKS: usize = 4096;

fn x_kinks(x: &ContinuousDist) -> Vec<f64> {
    let mut v = vec![x.support().0, x.support().1];
    if let ContinuousDist::Tabulated(t) = x {
        if t.xs().len() <= MAX_KINKS {
            v.extend_from_slice(t.xs());
        }
    }
    v
}

fn build_grid_law(
    x: &ContinuousDist,
    ln_num: LnFn,
    bounds: (f64, f64),
    mut kinks: Vec<f64>,
    i: &Interval,
) -> Result<ConditionalLaw> {
    let (xl, xh) = bounds;
    if !(xl <= xh) {
        return Err(Error::EmptyWindow { mass: 0.0 });
    }
    let (mut lo, mut hi) = (xl, xh);
    if !lo.is_finite() || !hi.is_finite() {
        let m = x.mean();
        let s = x.variance().sqrt();
        let r = effective_range(|t| ln_num(t), (xl, xh), if m.is_finite() { m } else { 0.0 }, s)
            .map_err(|_| Error::EmptyWindow { mass: 0.0 })?;
        lo = r.lo;
        hi = r.hi;
    }
    if lo == hi {
        return Err(Error::EmptyWindow { mass: 0.0 });
    }
    let (lo, hi) = trim_range(&*ln_num, lo, hi).ok_or(Error::EmptyWindow { mass: 0.0 })?;
    kinks.retain(|k| k.is_finite() && *k > lo && *k < hi);
    kinks.sort_by(f64::total_cmp);
    kinks.dedup();
    if kinks.len() > MAX_KINKS {
        kinks.clear();
    }
    let grid = GridSpec::new(lo, hi, PANELS, ORDER).with_breakpoints(&kinks).build();
    let mut vals = Vec::with_capacity(grid.len());
    for &t in &grid.nodes {
        let v = ln_num(t);
        if v.is_nan() || v > 1e-12 {
            return Err(Error::NonFiniteConditional { x: t, value: v.exp() });
        }
        vals.push(v);
    }
    let ln_mass = ln_sum_exp(&grid.weights, &vals);
    if ln_mass == f64::NEG_INFINITY || ln_mass.is_nan() {
        return Err(Error::EmptyWindow { mass: 0.0 });
    }
    let ln_dens = vals.iter().map(|v| v - ln_mass).collect();
    Ok(ConditionalLaw {
        window: *i,
        method: Method::BayesExact,
        mass_in_window: ln_mass.exp(),
        ln_mass_in_window: ln_mass,
        mc_meta: None,
        finite_n: None,
        repr: Repr::Grid { grid, ln_dens, ln_num },
    })
}

fn build_point_law(
    x: &DiscreteDist,
    ln_num: &dyn Fn(f64) -> f64,
    bounds: (f64, f64),
    i: &Interval,
) -> Result<ConditionalLaw> {
    let mut xs: Vec<f64> =
        x.enumerate().into_iter().map(|(k, _)| x.position(k)).filter(|p| *p >= bounds.0 && *p <= bounds.1).collect();
    xs.sort_by(f64::total_cmp);
    let mut vals = Vec::with_capacity(xs.len());
    for &p in &xs {
        let v = ln_num(p);
        if v.is_nan() || v > 1e-12 {
            return Err(Error::NonFiniteConditional { x: p, value: v.exp() });
        }
        vals.push(v);
    }
    let ln_mass = vals.iter().fold(f64::NEG_INFINITY, |a, &b| log_add_exp(a, b));
    if ln_mass == f64::NEG_INFINITY || ln_mass.is_nan() {
        return Err(Error::EmptyWindow { mass: 0.0 });
    }
    let keep: Vec<usize> = (0..xs.len()).filter(|&j| vals[j] > f64::NEG_INFINITY).collect();
    let pmf = keep.iter().map(|&j| (vals[j] - ln_mass).exp()).collect();
    let xs = keep.iter().map(|&j| xs[j]).collect();
    Ok(ConditionalLaw {
        window: *i,
        method: Method::BayesExact,
        mass_in_window: ln_mass.exp(),
        ln_mass_in_window: ln_mass,
        mc_meta: None,
        finite_n: None,
        repr: Repr::Points { xs, pmf },
    })
}

fn ln_marginal(x: &Dist) -> LnFn {
    match x {
        Dist::Continuous(c) => {
            let c = c.clone();
            Arc::new(move |t| c.ln_pdf(t))
        }
        Dist::Discrete(d) => {
            let d = d.clone();
            Arc::new(move |t| d.ln_pmf_at(t))
        }
    }
}

/// Exact conditional of `X` given `X + Y ∈ I` for independent `X`, `Y`:
/// `f_X(x) P(Y ∈ I - x) / P(X + Y ∈ I)`, normalized by its own integral.
pub fn condition_exact(x: &Dist, y: &Dist, i: &Interval) -> Result<ConditionalLaw> {
    let (ylo, yhi) = y.bounds();
    let (xlo, xhi) = x.bounds();
    let bounds = (xlo.max(i.lo() - yhi), xhi.min(i.hi() - ylo));
    let fx = ln_marginal(x);
    let yy = y.clone();
    let (a, b) = (i.lo(), i.hi());
    let ln_num: LnFn = Arc::new(move |t| {
        let lf = fx(t);
        if lf == f64::NEG_INFINITY {
            return lf;
        }
        lf + yy.ln_prob_between(a - t, b - t)
    });
    match x {
        Dist::Continuous(c) => {
            if !c.has_density() {
                return Err(Error::InvalidParameter("subsystem law needs a density or pmf".into()));
            }
            let mut kinks = x_kinks(c);
            kinks.extend_from_slice(&[a - ylo, b - ylo, a - yhi, b - yhi]);
            if let Dist::Discrete(d) = y {
                let ks = d.enumerate();
                if ks.len() <= MAX_KINKS / 2 {
                    for (k, _) in ks {
                        let p = d.position(k);
                        kinks.push(a - p);
                        kinks.push(b - p);
                    }
                }
            }
            build_grid_law(c, ln_num, bounds, kinks, i)
        }
        Dist::Discrete(d) => build_point_law(d, &*ln_num, bounds, i),
    }
}

/// [`condition_exact`] on a [`Bath`]; dependent baths are rejected.
pub fn condition_exact_bath(x: &Dist, bath: &Bath, i: &Interval) -> Result<ConditionalLaw> {
    match bath {
        Bath::Independent(y) => condition_exact(x, y, i),
        Bath::Dependent(_) => Err(Error::UnsupportedDependence),
    }
}

/// Exact conditional with a bath that depends on `x`:
/// `f_X(x) P(Y ∈ I - x | X = x)`, normalized by its own integral.
pub fn condition_exact_dependent(x: &Dist, bath: &ConditionalBath, i: &Interval) -> Result<ConditionalLaw> {
    let fx = ln_marginal(x);
    let prob = bath.prob.clone();
    let (a, b) = (i.lo(), i.hi());
    let ln_num: LnFn = Arc::new(move |t| {
        let lf = fx(t);
        if lf == f64::NEG_INFINITY {
            return lf;
        }
        let p = prob(t, a - t, b - t);
        if !(0.0..=1.0).contains(&p) {
            return f64::NAN;
        }
        lf + p.ln()
    });
    let bounds = x.bounds();
    match x {
        Dist::Continuous(c) => {
            if !c.has_density() {
                return Err(Error::InvalidParameter("subsystem law needs a density or pmf".into()));
            }
            let probe = ln_num.clone();
            let law = build_grid_law(c, ln_num, bounds, x_kinks(c), i);
            if let Err(Error::EmptyWindow { .. }) = &law {
                // surface an invalid callable rather than an empty window
                let (m, s) = (c.mean(), c.variance().sqrt().max(1e-300));
                for j in -64..=64 {
                    let t = m + s * j as f64 / 8.0;
                    if probe(t).is_nan() && c.ln_pdf(t) > f64::NEG_INFINITY {
                        return Err(Error::NonFiniteConditional { x: t, value: bath.prob(t, a - t, b - t) });
                    }
                }
            }
            law
        }
        Dist::Discrete(d) => build_point_law(d, &*ln_num, bounds, i),
    }
}

/// Inputs and output context of a finite-`n` conditional.
pub fn finite_n_conditional(
    x: &Dist,
    bath: &BathFamily,
    scheme: &ScalingScheme,
    i: &Interval,
    n: u64,
) -> Result<ConditionalLaw> {
    let s = scheme.at(n)?;
    let window = s.condition_window(i);
    let y = bath.at(n)?;
    let mut law = condition_exact(x, &y, &window)?;
    law.finite_n = Some(FiniteN { n, beta: s.beta(), mu: s.mu(), window });
    Ok(law)
}

/// Canonical approximation of a conditional: the tilted subsystem law.
pub fn canonical_approx(x: &Dist, param: &TiltParam) -> Result<TiltedDist> {
    tilting::tilt(x, param)
}

pub fn canonical_approx_field(x: &Dist, field: &TiltField) -> Result<TiltedDist> {
    tilting::tilt_field(x, field)
}

pub const MC_CHUNK: u64 = 65_536;
pub const MC_BINS: usize = 64;
pub const MC_MIN_SAMPLES: u64 = 10_000;
pub const MC_MIN_ACCEPTED: u64 = 100;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th independent stream derived from `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(1)))
}

fn draw_one(d: &Dist, rng: &mut dyn RngCore) -> f64 {
    match d {
        Dist::Continuous(c) => c.sampler().draw(rng),
        Dist::Discrete(k) => k.position(k.sampler().draw_index(rng)),
    }
}

enum Cells {
    Edges(Vec<f64>),
    Points(Vec<f64>),
}

fn mc_cells(x: &Dist) -> Result<Cells> {
    match x {
        Dist::Continuous(c) => {
            let (lo, hi) = c.effective_range()?;
            let mut edges = vec![lo];
            for j in 1..MC_BINS {
                let q = c.quantile(j as f64 / MC_BINS as f64);
                if q > *edges.last().unwrap_or(&lo) && q < hi {
                    edges.push(q);
                }
            }
            edges.push(hi);
            Ok(Cells::Edges(edges))
        }
        Dist::Discrete(d) => {
            let mut xs: Vec<f64> = d.enumerate().into_iter().map(|(k, _)| d.position(k)).collect();
            xs.sort_by(f64::total_cmp);
            Ok(Cells::Points(xs))
        }
    }
}

fn nearest_cell(cells: &Cells, v: f64) -> usize {
    match cells {
        Cells::Edges(e) => {
            let n = e.len() - 1;
            e.partition_point(|&t| t <= v).saturating_sub(1).min(n - 1)
        }
        Cells::Points(xs) => match xs.binary_search_by(|t| t.total_cmp(&v)) {
            Ok(i) => i,
            Err(i) => {
                if i == 0 {
                    0
                } else if i >= xs.len() {
                    xs.len() - 1
                } else if v - xs[i - 1] <= xs[i] - v {
                    i - 1
                } else {
                    i
                }
            }
        },
    }
}

/// Rejection sampler: draws `(x, y)` and keeps `x` when `x + y ∈ I`.
/// Draws are split into chunks of [`MC_CHUNK`], each with its own derived
/// stream, so the result depends only on `(samples, seed)`.
pub fn condition_mc(x: &Dist, bath: &Bath, i: &Interval, samples: u64, seed: u64) -> Result<ConditionalLaw> {
    if samples < MC_MIN_SAMPLES {
        return Err(Error::InvalidParameter(alloc::format!("need at least {MC_MIN_SAMPLES} samples")));
    }
    let draw_y: DrawFn = match bath {
        Bath::Independent(y) => {
            let y = y.clone();
            Arc::new(move |_, rng| draw_one(&y, rng))
        }
        Bath::Dependent(b) => {
            b.sampler.clone().ok_or_else(|| Error::InvalidParameter("conditional bath has no sampler".into()))?
        }
    };
    let cells = mc_cells(x)?;
    let n_cells = match &cells {
        Cells::Edges(e) => e.len() - 1,
        Cells::Points(p) => p.len(),
    };
    let mut counts = vec![0u64; n_cells];
    let mut accepted = 0u64;
    let chunks = samples.div_ceil(MC_CHUNK);
    for c in 0..chunks {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, c));
        let len = MC_CHUNK.min(samples - c * MC_CHUNK);
        for _ in 0..len {
            let xv = draw_one(x, &mut rng);
            let yv = draw_y(xv, &mut rng);
            if i.contains(xv + yv) {
                counts[nearest_cell(&cells, xv)] += 1;
                accepted += 1;
            }
        }
    }
    if accepted < MC_MIN_ACCEPTED {
        return Err(Error::TooFewAccepted { accepted, samples });
    }
    let na = accepted as f64;
    let probs: Vec<f64> = counts.iter().map(|&k| k as f64 / na).collect();
    let ses: Vec<f64> = probs.iter().map(|p| (p * (1.0 - p) / na).sqrt()).collect();
    let repr = match cells {
        Cells::Edges(edges) => {
            let widths: Vec<f64> = edges.windows(2).map(|e| e[1] - e[0]).collect();
            Repr::Histogram {
                dens: probs.iter().zip(&widths).map(|(p, w)| p / w).collect(),
                stderr: ses.iter().zip(&widths).map(|(s, w)| s / w).collect(),
                edges,
            }
        }
        Cells::Points(xs) => Repr::PointHistogram { xs, pmf: probs, stderr: ses },
    };
    let rate = na / samples as f64;
    Ok(ConditionalLaw {
        window: *i,
        method: Method::McRejection,
        mass_in_window: rate,
        ln_mass_in_window: rate.ln(),
        mc_meta: Some(McMeta { samples, accepted, seed }),
        finite_n: None,
        repr,
    })
}

/// Per-bin comparison of an exact conditional with a Monte Carlo one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agreement {
    /// Bins where either law has mass.
    pub bins: usize,
    /// Of those, bins within three standard errors.
    pub within: usize,
    pub fraction: f64,
    pub max_z: f64,
}

/// Standard errors come from the exact bin mass, `sqrt(p (1 - p) / accepted)`.
pub fn mc_agreement(exact: &ConditionalLaw, mc: &ConditionalLaw) -> Result<Agreement> {
    let meta = mc.mc_meta.ok_or(Error::GridMismatch)?;
    let na = meta.accepted as f64;
    let (exact_p, mc_p): (Vec<f64>, Vec<f64>) = match &mc.repr {
        Repr::Histogram { edges, .. } => (exact.bin_masses(edges), mc.bin_masses(edges)),
        Repr::PointHistogram { xs, pmf, .. } => (xs.iter().map(|&x| exact.density(x)).collect(), pmf.clone()),
        _ => return Err(Error::GridMismatch),
    };
    if exact.kind() != mc.kind() {
        return Err(Error::GridMismatch);
    }
    let mut bins = 0;
    let mut within = 0;
    let mut max_z = 0.0f64;
    for (&p, &q) in exact_p.iter().zip(&mc_p) {
        if p <= 0.0 && q <= 0.0 {
            continue;
        }
        bins += 1;
        let se = (p * (1.0 - p) / na).sqrt();
        let z = if se > 0.0 {
            (q - p).abs() / se
        } else if (q - p).abs() == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        max_z = max_z.max(z);
        if z <= 3.0 {
            within += 1;
        }
    }
    Ok(Agreement { bins, within, fraction: if bins == 0 { 1.0 } else { within as f64 / bins as f64 }, max_z })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use crate::special::std_normal_cdf;

    fn pois(m: f64) -> Dist {
        DiscreteDist::poisson(m).unwrap().into()
    }

    fn expo() -> Dist {
        ContinuousDist::exponential(1.0).unwrap().into()
    }

    #[test]
    fn poisson_splitting() {
        let c = condition_exact(&pois(2.0), &pois(6.0), &Interval::new(4.0, 0.0).unwrap()).unwrap();
        let (xs, pmf) = c.points().unwrap();
        assert_eq!(xs, &[0.0, 1.0, 2.0, 3.0, 4.0]);
        assert!((pmf[1] - 0.421875).abs() < 1e-12);
        let b = DiscreteDist::binomial(4, 0.25).unwrap();
        for (k, p) in pmf.iter().enumerate() {
            assert!((p - b.pmf(k as i64)).abs() < 1e-12);
        }
    }

    #[test]
    fn sure_event_returns_marginal() {
        let n: Dist = ContinuousDist::normal(0.0, 1.0).unwrap().into();
        let c = condition_exact(&n, &n, &Interval::from_endpoints(-60.0, 60.0).unwrap()).unwrap();
        for j in -40..=40 {
            let x = j as f64 * 0.2;
            let want = n.as_continuous().unwrap().pdf(x);
            assert!((c.density(x) - want).abs() < 1e-10);
        }
    }

    #[test]
    fn exponential_pair_is_uniform() {
        let z = 2.0;
        let c = condition_exact(&expo(), &expo(), &Interval::new(z, 1e-4).unwrap()).unwrap();
        let mut worst = 0.0f64;
        for j in 1..200 {
            let x = z * j as f64 / 200.0;
            worst = worst.max((c.density(x) - 1.0 / z).abs());
        }
        assert!(worst <= 1e-3, "{worst}");
        assert!((c.total_mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dependent_reduces_to_independent() {
        let y: Dist = ContinuousDist::gamma(3.0, 1.0).unwrap().into();
        let i = Interval::new(2.0, 0.5).unwrap();
        let a = condition_exact(&expo(), &y, &i).unwrap();
        let b = condition_exact_dependent(&expo(), &ConditionalBath::independent(y.clone()), &i).unwrap();
        for j in 0..100 {
            let x = j as f64 * 0.025;
            assert!((a.density(x) - b.density(x)).abs() < 1e-12);
        }
        assert!(matches!(
            condition_exact_bath(&expo(), &Bath::Dependent(ConditionalBath::independent(y)), &i),
            Err(Error::UnsupportedDependence)
        ));
    }

    #[test]
    fn correlated_gaussian_pair() {
        let rho: f64 = 0.3;
        let s = (1.0 - rho * rho).sqrt();
        let bath = ConditionalBath::new(move |x, lo, hi| {
            std_normal_cdf((hi - rho * x) / s) - std_normal_cdf((lo - rho * x) / s)
        });
        let x: Dist = ContinuousDist::normal(0.0, 1.0).unwrap().into();
        let i = Interval::new(1.0, 0.2).unwrap();
        let c = condition_exact_dependent(&x, &bath, &i).unwrap();
        let sz = (2.0 + 2.0 * rho).sqrt();
        let pz = std_normal_cdf(1.2 / sz) - std_normal_cdf(1.0 / sz);
        for j in -30..=30 {
            let t = j as f64 * 0.15;
            let num = (-0.5 * t * t).exp() / (2.0 * core::f64::consts::PI).sqrt()
                * (std_normal_cdf((1.2 - t - rho * t) / s) - std_normal_cdf((1.0 - t - rho * t) / s));
            assert!((c.density(t) - num / pz).abs() < 1e-6);
        }
        let bad = ConditionalBath::new(|_, _, _| 1.5);
        assert!(matches!(condition_exact_dependent(&x, &bad, &i), Err(Error::NonFiniteConditional { .. })));
    }

    #[test]
    fn finite_n_examples() {
        let bath = BathFamily::iid_sum(expo(), -1);
        let scheme = ScalingScheme::large_deviation(1).unwrap();
        let i = Interval::new(0.4, 0.1).unwrap();
        let law = finite_n_conditional(&expo(), &bath, &scheme, &i, 50).unwrap();
        assert_eq!(law.finite_n.unwrap().window, Interval::new(20.0, 5.0).unwrap());
        let y = ContinuousDist::gamma(49.0, 1.0).unwrap();
        let num = |x: f64| (-x).exp() * y.prob_between(20.0 - x, 25.0 - x);
        let tol = quad::QuadTol::new(1e-30, 1e-13);
        let z = quad::integrate(num, 0.0, 25.0, tol).unwrap().value;
        for j in 0..100 {
            let x = j as f64 * 0.25;
            let want = num(x) / z;
            assert!((law.density(x) - want).abs() < 1e-8 * want.max(1e-300) + 1e-300, "x={x}");
        }
        // n = 1: zero bath copies, X restricted to E_1
        let one = finite_n_conditional(&expo(), &bath, &scheme, &i, 1).unwrap();
        let mass = (-0.4f64).exp() - (-0.5f64).exp();
        assert!((one.density(0.45) - (-0.45f64).exp() / mass).abs() < 1e-10);
        assert_eq!(one.density(0.3), 0.0);
        let pb = BathFamily::Custom(Arc::new(|n| Ok(pois(n as f64))));
        let g = ScalingScheme::gaussian(1.0, 1).unwrap();
        let law = finite_n_conditional(&pois(1.0), &pb, &g, &Interval::new(-1.0, 0.2).unwrap(), 100).unwrap();
        assert!((law.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nested_windows_mix() {
        let y: Dist = ContinuousDist::gamma(4.0, 1.0).unwrap().into();
        let whole = Interval::new(3.0, 1.0).unwrap();
        let left = Interval::new(3.0, 0.3).unwrap();
        let right = Interval::new(3.3, 0.7).unwrap();
        let cw = condition_exact(&expo(), &y, &whole).unwrap();
        let cl = condition_exact(&expo(), &y, &left).unwrap();
        let cr = condition_exact(&expo(), &y, &right).unwrap();
        for j in 0..80 {
            let x = j as f64 * 0.05;
            let mix = (cl.mass_in_window * cl.density(x) + cr.mass_in_window * cr.density(x)) / cw.mass_in_window;
            assert!((mix - cw.density(x)).abs() < 1e-9);
        }
    }

    #[test]
    fn canonical_examples() {
        let p = TiltParam::user(0.0, Interval::new(0.0, 1.0).unwrap());
        assert_eq!(canonical_approx(&expo(), &p).unwrap().law(), Some(&expo()));
        let e = ContinuousDist::exponential(1.0).unwrap();
        let i = Interval::new(0.0, 0.5).unwrap();
        let bp = tilting::bath_slope_param(&e, &i, 1.0).unwrap();
        let t = canonical_approx(&expo(), &TiltParam { lambda: -bp.lambda, ..bp }).unwrap();
        assert_eq!(t.law(), Some(&Dist::from(ContinuousDist::Exponential { rate: 2.0 })));
        let n01 = ContinuousDist::normal(0.0, 1.0).unwrap();
        let w = Interval::new(-1.0, 0.2).unwrap();
        let n = 100.0f64;
        let bp = tilting::bath_slope_param(&n01, &w, 1.0 / n.sqrt()).unwrap();
        let t = canonical_approx(&pois(1.0), &bp).unwrap();
        let mut series = 0.0;
        let mut term = (-1.0f64).exp();
        for k in 0..60 {
            if k > 0 {
                term /= k as f64;
            }
            series += term * (-(bp.lambda) * k as f64).exp();
        }
        assert!((t.normalizer() - 1.0 / series).abs() < 1e-12);
    }

    #[test]
    fn mc_examples() {
        let n: Dist = ContinuousDist::normal(0.0, 1.0).unwrap().into();
        let full = Interval::from_endpoints(-100.0, 100.0).unwrap();
        let c = condition_mc(&n, &Bath::Independent(n.clone()), &full, 20_000, 3).unwrap();
        assert_eq!(c.mass_in_window, 1.0);
        let i = Interval::from_endpoints(1.9, 2.1).unwrap();
        let a = condition_mc(&expo(), &Bath::Independent(expo()), &i, 100_000, 11).unwrap();
        let b = condition_mc(&expo(), &Bath::Independent(expo()), &i, 100_000, 11).unwrap();
        assert_eq!(a.rows(), b.rows());
        let g = ContinuousDist::gamma(2.0, 1.0).unwrap().prob_between(1.9, 2.1);
        assert!((a.mass_in_window - g).abs() <= 3.0 * (g * (1.0 - g) / 1e5).sqrt());
        assert!((a.total_mass() - 1.0).abs() < 1e-12);
        assert!(matches!(
            condition_mc(&expo(), &Bath::Independent(expo()), &i, 100, 1),
            Err(Error::InvalidParameter(_))
        ));
        let tiny = Interval::new(30.0, 1e-6).unwrap();
        assert!(matches!(
            condition_mc(&expo(), &Bath::Independent(expo()), &tiny, 10_000, 1),
            Err(Error::TooFewAccepted { .. })
        ));
    }
}
