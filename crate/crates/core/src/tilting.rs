//! Exponential tilting `f(x) ↦ A f(x) e^{-λx}` and the tilt parameter
//! routes that do not need a rate function: bath interval-probability
//! slopes, interaction corrections, and the shift/reflection transforms.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::dist::{effective_range, ContinuousDist, DiscreteDist, Dist};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::quad::{Grid, GridSpec};

/// Where a tilt parameter came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provenance {
    BathSlope,
    RateFunction,
    MaxEntropy,
    User,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::BathSlope => "bath-slope",
            Provenance::RateFunction => "rate-function",
            Provenance::MaxEntropy => "max-entropy",
            Provenance::User => "user",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "bath-slope" => Provenance::BathSlope,
            "rate-function" => Provenance::RateFunction,
            "max-entropy" => Provenance::MaxEntropy,
            "user" => Provenance::User,
            _ => return None,
        })
    }
}

/// Scalar tilt `λ` with its origin; canonical weights are `e^{-λx}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltParam {
    pub lambda: f64,
    pub provenance: Provenance,
    pub window: Interval,
    /// Multiplier already folded into `lambda` (`β_n`, or 1).
    pub scale: f64,
    pub note: Option<String>,
}

impl TiltParam {
    pub fn new(lambda: f64, provenance: Provenance, window: Interval, scale: f64) -> Self {
        Self { lambda, provenance, window, scale, note: None }
    }

    pub fn user(lambda: f64, window: Interval) -> Self {
        Self::new(lambda, Provenance::User, window, 1.0)
    }

    /// `1/λ`, or `+inf` when `λ = 0`.
    pub fn temperature(&self) -> f64 {
        if self.lambda == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.lambda
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { lambda: self.lambda * factor, scale: self.scale * factor, ..self.clone() }
    }
}

type FieldFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Position-dependent exponent `ζ(x)` with a uniform bound.
#[derive(Clone)]
pub struct TiltField {
    zeta: FieldFn,
    pub bound: f64,
}

impl core::fmt::Debug for TiltField {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("TiltField").field("bound", &self.bound).finish_non_exhaustive()
    }
}

impl TiltField {
    pub fn new(zeta: impl Fn(f64) -> f64 + Send + Sync + 'static, bound: f64) -> Self {
        Self { zeta: Arc::new(zeta), bound }
    }

    pub fn constant(lambda: f64) -> Self {
        Self::new(move |_| lambda, lambda.abs())
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.zeta)(x)
    }

    /// Checks `0 <= ζ(x) <= bound` at every node.
    pub fn check(&self, nodes: &[f64]) -> Result<()> {
        for &x in nodes {
            let z = self.eval(x);
            if !(z >= 0.0 && z <= self.bound) {
                return Err(Error::InvalidParameter(alloc::format!(
                    "tilt field value {z} at x = {x} is outside [0, {}]",
                    self.bound
                )));
            }
        }
        Ok(())
    }
}

/// What was applied to the base law.
#[derive(Debug, Clone)]
pub enum Tilt {
    Param(TiltParam),
    Lambda(f64),
    Field(TiltField),
}

#[derive(Debug, Clone)]
enum TiltedLaw {
    Closed(Dist),
    /// Field tilt: ζ memoized at the grid nodes (continuous) or support
    /// points (discrete).
    Field {
        nodes: Vec<f64>,
        zeta: Vec<f64>,
        grid: Option<Grid>,
    },
}

/// A tilted law with its normalizer `A = 1 / ∫ f(x) e^{-ζ(x) x} dx`.
#[derive(Debug, Clone)]
pub struct TiltedDist {
    base: Dist,
    tilt: Tilt,
    law: TiltedLaw,
    log_normalizer: f64,
}

impl TiltedDist {
    pub fn base(&self) -> &Dist {
        &self.base
    }

    pub fn tilt(&self) -> &Tilt {
        &self.tilt
    }

    /// Closed representation of the tilted law (absent for field tilts).
    pub fn law(&self) -> Option<&Dist> {
        match &self.law {
            TiltedLaw::Closed(d) => Some(d),
            TiltedLaw::Field { .. } => None,
        }
    }

    pub fn normalizer(&self) -> f64 {
        self.log_normalizer.exp()
    }

    pub fn log_normalizer(&self) -> f64 {
        self.log_normalizer
    }

    pub fn is_discrete(&self) -> bool {
        self.base.is_discrete()
    }

    /// Memoized field values `(nodes, ζ(nodes))`, if a field was applied.
    pub fn field_memo(&self) -> Option<(&[f64], &[f64])> {
        match &self.law {
            TiltedLaw::Field { nodes, zeta, .. } => Some((nodes, zeta)),
            TiltedLaw::Closed(_) => None,
        }
    }

    fn zeta_at(&self, x: f64) -> f64 {
        match (&self.tilt, &self.law) {
            (Tilt::Field(f), TiltedLaw::Field { nodes, zeta, .. }) => match nodes.binary_search_by(|v| v.total_cmp(&x))
            {
                Ok(i) => zeta[i],
                Err(_) => f.eval(x),
            },
            (Tilt::Param(p), _) => p.lambda,
            (Tilt::Lambda(l), _) => *l,
            (Tilt::Field(f), _) => f.eval(x),
        }
    }

    /// Log density (continuous) or log mass at position `x` (discrete).
    pub fn ln_density(&self, x: f64) -> f64 {
        match &self.law {
            TiltedLaw::Closed(Dist::Continuous(c)) => c.ln_pdf(x),
            TiltedLaw::Closed(Dist::Discrete(d)) => d.ln_pmf_at(x),
            TiltedLaw::Field { .. } => {
                let base = match &self.base {
                    Dist::Continuous(c) => c.ln_pdf(x),
                    Dist::Discrete(d) => d.ln_pmf_at(x),
                };
                if base == f64::NEG_INFINITY {
                    return base;
                }
                base - self.zeta_at(x) * x + self.log_normalizer
            }
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        self.ln_density(x).exp()
    }

    pub fn mean(&self) -> f64 {
        match &self.law {
            TiltedLaw::Closed(d) => d.mean(),
            TiltedLaw::Field { nodes, grid, .. } => match grid {
                Some(g) => g.integrate(|x| x * self.density(x)),
                None => nodes.iter().map(|&x| x * self.density(x)).sum(),
            },
        }
    }
}

fn nonneg_support(d: &Dist) -> bool {
    d.bounds().0 >= 0.0
}

/// Grid ratio `ln(Σ w f e^{-ζx} / Σ w f)`, refined until stable.
fn grid_log_ratio<Z: Fn(f64) -> f64>(base: &ContinuousDist, zeta: Z, breakpoints: &[f64]) -> Result<(f64, Grid)> {
    let lambda_hint = zeta(base.mean());
    let (c, s) = {
        let m = base.mean();
        let sd = base.variance().sqrt();
        (m - lambda_hint * sd * sd, sd)
    };
    let range = effective_range(|x| base.ln_pdf(x) - zeta(x) * x, base.support(), c, s)
        .map_err(|_| Error::DivergentNormalizer { lambda: lambda_hint })?;
    let base_range = base.effective_range()?;
    let lo = range.lo.min(base_range.0);
    let hi = range.hi.max(base_range.1);
    let mut bps: Vec<f64> = breakpoints.to_vec();
    bps.push(base.support().0);
    bps.push(base.support().1);
    // e^{-ζx} <= 1 on the nonnegative axis when ζ >= 0, so no rescaling is needed there
    let shift = if base.support().0 >= 0.0 && lambda_hint >= 0.0 { 0.0 } else { range.ln_max };
    let eval = |g: &Grid| {
        let mut plain = 0.0;
        let mut tilted = 0.0;
        for (&x, &w) in g.nodes.iter().zip(&g.weights) {
            let lf = base.ln_pdf(x);
            if lf == f64::NEG_INFINITY {
                continue;
            }
            plain += w * lf.exp();
            tilted += w * (lf - zeta(x) * x - shift).exp();
        }
        tilted.ln() + shift - plain.ln()
    };
    let mut spec = GridSpec::new(lo, hi, 128, 16).with_breakpoints(&bps);
    let mut grid = spec.build();
    let mut val = eval(&grid);
    for _ in 0..4 {
        let next_spec = spec.refined();
        let next_grid = next_spec.build();
        let next = eval(&next_grid);
        let done = (next - val).abs() <= 1e-12 * (1.0 + val.abs());
        spec = next_spec;
        grid = next_grid;
        val = next;
        if done {
            break;
        }
    }
    if !val.is_finite() {
        return Err(Error::DivergentNormalizer { lambda: lambda_hint });
    }
    Ok((val, grid))
}

fn table_breakpoints(c: &ContinuousDist) -> Vec<f64> {
    match c {
        ContinuousDist::Tabulated(t) if t.xs().len() <= 4096 => t.xs().to_vec(),
        _ => Vec::new(),
    }
}

/// Tilts `base` by a scalar `λ`.
pub fn tilt_lambda(base: &Dist, lambda: f64) -> Result<TiltedDist> {
    tilt_with(base, lambda, Tilt::Lambda(lambda))
}

/// Tilts `base` by `param.lambda`: density `A f(x) e^{-λx}`.
pub fn tilt(base: &Dist, param: &TiltParam) -> Result<TiltedDist> {
    tilt_with(base, param.lambda, Tilt::Param(param.clone()))
}

fn tilt_with(base: &Dist, lambda: f64, tag: Tilt) -> Result<TiltedDist> {
    if !lambda.is_finite() {
        return Err(Error::InvalidParameter("tilt parameter must be finite".into()));
    }
    if lambda == 0.0 {
        return Ok(TiltedDist {
            base: base.clone(),
            tilt: tag,
            law: TiltedLaw::Closed(base.clone()),
            log_normalizer: 0.0,
        });
    }
    let (law, ln_m) = match base {
        Dist::Continuous(c) => match c.tilted_closed(lambda) {
            Some(r) => {
                let (l, m) = r?;
                (Dist::Continuous(l), m)
            }
            None => {
                let (ln_m, _) = grid_log_ratio(c, |_| lambda, &table_breakpoints(c))?;
                let law = ContinuousDist::Tilted { base: alloc::boxed::Box::new(c.clone()), lambda, log_norm: -ln_m };
                (Dist::Continuous(law), ln_m)
            }
        },
        Dist::Discrete(d) => {
            let (l, m) = d.tilted_closed(lambda)?;
            (Dist::Discrete(l), m)
        }
    };
    let mut log_normalizer = -ln_m;
    if lambda > 0.0 && nonneg_support(base) {
        // E[e^{-λX}] <= 1 here; this only absorbs rounding
        log_normalizer = log_normalizer.max(0.0);
    }
    Ok(TiltedDist { base: base.clone(), tilt: tag, law: TiltedLaw::Closed(law), log_normalizer })
}

/// Tilts `base` by an `x`-dependent exponent: density `A f(x) e^{-ζ(x) x}`.
pub fn tilt_field(base: &Dist, field: &TiltField) -> Result<TiltedDist> {
    match base {
        Dist::Continuous(c) => {
            let z = |x: f64| field.eval(x);
            let (ln_m, grid) = grid_log_ratio(c, z, &table_breakpoints(c))?;
            let zeta: Vec<f64> = grid.nodes.iter().map(|&x| field.eval(x)).collect();
            Ok(TiltedDist {
                base: base.clone(),
                tilt: Tilt::Field(field.clone()),
                law: TiltedLaw::Field { nodes: grid.nodes.clone(), zeta, grid: Some(grid) },
                log_normalizer: -ln_m,
            })
        }
        Dist::Discrete(d) => {
            let pts = d.enumerate();
            let nodes: Vec<f64> = pts.iter().map(|(k, _)| d.position(*k)).collect();
            let zeta: Vec<f64> = nodes.iter().map(|&x| field.eval(x)).collect();
            let plain: f64 = pts.iter().map(|(_, p)| p).sum();
            let tilted: f64 = pts.iter().zip(nodes.iter().zip(&zeta)).map(|((_, p), (x, z))| p * (-z * x).exp()).sum();
            let ln_m = tilted.ln() - plain.ln();
            if !ln_m.is_finite() {
                return Err(Error::DivergentNormalizer { lambda: field.bound });
            }
            Ok(TiltedDist {
                base: base.clone(),
                tilt: Tilt::Field(field.clone()),
                law: TiltedLaw::Field { nodes, zeta, grid: None },
                log_normalizer: -ln_m,
            })
        }
    }
}

/// Tabulated discrete law of a field tilt, for use where a [`Dist`] is needed.
pub fn field_tilt_pmf(t: &TiltedDist) -> Option<Result<DiscreteDist>> {
    let d = t.base.as_discrete()?;
    let ks: Vec<i64> = d.enumerate().into_iter().map(|(k, _)| k).collect();
    let ps: Vec<f64> = ks.iter().map(|&k| t.density(d.position(k))).collect();
    let (scale, shift) = match d {
        DiscreteDist::Lattice { scale, shift, .. } => (*scale, *shift),
        _ => (1.0, 0.0),
    };
    Some(DiscreteDist::tabulated(ks, ps).and_then(|inner| DiscreteDist::lattice(inner, scale, shift)))
}

/// `∂/∂y log P(Y ∈ [y, y+δ])` at `y = h`, from the density ratio
/// `(f(h+δ) - f(h)) / P(Y ∈ I)`.
pub fn log_interval_prob_slope(dist: &ContinuousDist, i: &Interval) -> Result<f64> {
    let ln_p = dist.ln_interval_prob(i);
    if ln_p == f64::NEG_INFINITY || ln_p.is_nan() {
        return Err(Error::ZeroInterval);
    }
    if !dist.has_density() {
        return log_interval_prob_slope_fd(dist, i);
    }
    let up = (dist.ln_pdf(i.hi()) - ln_p).exp();
    let down = (dist.ln_pdf(i.lo()) - ln_p).exp();
    let v = up - down;
    if !v.is_finite() {
        return Err(Error::NonFiniteSlope);
    }
    Ok(v)
}

/// Central difference of `log P(Y ∈ [y, y+δ])` with step `min(δ, 1e-4) 1e-2`.
pub fn log_interval_prob_slope_fd(dist: &ContinuousDist, i: &Interval) -> Result<f64> {
    let step = i.delta.min(1e-4) * 1e-2;
    let at = |y: f64| dist.ln_prob_between(y, y + i.delta);
    if at(i.h) == f64::NEG_INFINITY {
        return Err(Error::ZeroInterval);
    }
    let v = (at(i.h + step) - at(i.h - step)) / (2.0 * step);
    if !v.is_finite() {
        return Err(Error::NonFiniteSlope);
    }
    Ok(v)
}

/// `λ = scale · ψ(I)` with `ψ` the bath's log interval-probability slope.
pub fn bath_slope_param(bath: &ContinuousDist, i: &Interval, scale: f64) -> Result<TiltParam> {
    let psi = log_interval_prob_slope(bath, i)?;
    Ok(TiltParam::new(scale * psi, Provenance::BathSlope, *i, scale))
}

type CouplingFn = Arc<dyn Fn(f64, &Interval) -> f64 + Send + Sync>;

/// Interaction factors `G(ξ; I)` and `R(ξ; I)` with `G(0; I) = R(0; I) = 1`,
/// and their log-derivatives at zero.
#[derive(Clone)]
pub struct InteractionModel {
    g: CouplingFn,
    r: CouplingFn,
    pub dlog_g0: f64,
    pub dlog_r0: f64,
}

impl core::fmt::Debug for InteractionModel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("InteractionModel")
            .field("dlog_g0", &self.dlog_g0)
            .field("dlog_r0", &self.dlog_r0)
            .finish_non_exhaustive()
    }
}

/// Which correction a parameter receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrectionMode {
    Smooth,
    Ldp,
}

const FD_STEP: f64 = 1e-5;

fn central_log_derivative(f: &CouplingFn, i: &Interval) -> f64 {
    (f(FD_STEP, i).ln() - f(-FD_STEP, i).ln()) / (2.0 * FD_STEP)
}

impl InteractionModel {
    pub fn independent() -> Self {
        Self { g: Arc::new(|_, _| 1.0), r: Arc::new(|_, _| 1.0), dlog_g0: 0.0, dlog_r0: 0.0 }
    }

    /// Log-derivatives are taken by central differences at `ξ = 0`.
    pub fn new(
        g: impl Fn(f64, &Interval) -> f64 + Send + Sync + 'static,
        r: impl Fn(f64, &Interval) -> f64 + Send + Sync + 'static,
        window: &Interval,
    ) -> Result<Self> {
        let g: CouplingFn = Arc::new(g);
        let r: CouplingFn = Arc::new(r);
        let dlog_g0 = central_log_derivative(&g, window);
        let dlog_r0 = central_log_derivative(&r, window);
        let m = Self { g, r, dlog_g0, dlog_r0 };
        m.validate(window)?;
        Ok(m)
    }

    pub fn with_derivatives(
        g: impl Fn(f64, &Interval) -> f64 + Send + Sync + 'static,
        r: impl Fn(f64, &Interval) -> f64 + Send + Sync + 'static,
        dlog_g0: f64,
        dlog_r0: f64,
    ) -> Self {
        Self { g: Arc::new(g), r: Arc::new(r), dlog_g0, dlog_r0 }
    }

    pub fn g(&self, xi: f64, i: &Interval) -> f64 {
        (self.g)(xi, i)
    }

    pub fn r(&self, xi: f64, i: &Interval) -> f64 {
        (self.r)(xi, i)
    }

    /// `G(0) = R(0) = 1` exactly and stored derivatives within `1e-6` of
    /// central differences.
    pub fn validate(&self, i: &Interval) -> Result<()> {
        if self.g(0.0, i) != 1.0 || self.r(0.0, i) != 1.0 {
            return Err(Error::InvalidParameter("interaction factors must equal 1 at zero".into()));
        }
        let dg = central_log_derivative(&self.g, i);
        let dr = central_log_derivative(&self.r, i);
        if !((dg - self.dlog_g0).abs() <= 1e-6 && (dr - self.dlog_r0).abs() <= 1e-6) {
            return Err(Error::InvalidParameter("interaction derivatives disagree with finite differences".into()));
        }
        Ok(())
    }
}

/// Subtracts the interaction's log-derivative at zero from the parameter.
pub fn corrected_param(base: &TiltParam, interaction: &InteractionModel, mode: CorrectionMode) -> TiltParam {
    let (d, label) = match mode {
        CorrectionMode::Smooth => (interaction.dlog_g0, "G"),
        CorrectionMode::Ldp => (interaction.dlog_r0, "R"),
    };
    let mut out = base.clone();
    out.lambda = base.lambda - d;
    if d != 0.0 {
        out.note = Some(alloc::format!("corrected by d/dxi log {label}(0) = {d}"));
    }
    out
}

/// Law of `X - C` for the lower bound `C`, together with `C`.
pub fn shift_transform(dist: &ContinuousDist) -> Result<(ContinuousDist, f64)> {
    let c = dist.support().0;
    if !c.is_finite() {
        return Err(Error::UnboundedBelow);
    }
    Ok((ContinuousDist::affine(dist.clone(), 1.0, -c)?, c))
}

pub fn unshift(dist: &ContinuousDist, c: f64) -> Result<ContinuousDist> {
    ContinuousDist::affine(dist.clone(), 1.0, c)
}

/// Law of `-X`; requires a finite upper bound.
pub fn reflect_transform(dist: &ContinuousDist) -> Result<ContinuousDist> {
    if !dist.support().1.is_finite() {
        return Err(Error::UnboundedAbove);
    }
    ContinuousDist::affine(dist.clone(), -1.0, 0.0)
}
