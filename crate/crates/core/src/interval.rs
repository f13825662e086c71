//! Windows `I = [h, h + δ]` and the scaling schemes that place them at
//! `E_n = μ_n + I / β_n`.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Result};

/// Closed interval `[h, h + delta]`; `delta = 0` is the single point `{h}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub h: f64,
    pub delta: f64,
}

impl Interval {
    pub fn new(h: f64, delta: f64) -> Result<Self> {
        if !(delta >= 0.0) || !h.is_finite() || !delta.is_finite() {
            return Err(invalid("interval needs finite h and delta >= 0"));
        }
        Ok(Self { h, delta })
    }

    pub fn from_endpoints(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi - lo)
    }

    pub fn lo(&self) -> f64 {
        self.h
    }

    pub fn hi(&self) -> f64 {
        self.h + self.delta
    }

    pub fn midpoint(&self) -> f64 {
        self.h + 0.5 * self.delta
    }

    /// The set `I - x`.
    pub fn shift(&self, x: f64) -> Self {
        Self { h: self.h - x, delta: self.delta }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo() && v <= self.hi()
    }

    /// Affine image `{a v + b : v ∈ I}` (endpoints reordered when `a < 0`).
    pub fn map_affine(&self, a: f64, b: f64) -> Result<Self> {
        let (p, q) = (a * self.lo() + b, a * self.hi() + b);
        Self::from_endpoints(p.min(q), p.max(q))
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        other.lo() >= self.lo() && other.hi() <= self.hi()
    }
}

/// How `β_n` and `μ_n` depend on `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeKind {
    /// `β_n = n^{-p}`, `μ_n = n · mu_per_n`.
    Power { exponent: f64, mu_per_n: f64 },
    /// Fixed `β`, `μ` for all `n`.
    Constant { beta: f64, mu: f64 },
}

/// A scaling scheme evaluated at a specific `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingScheme {
    pub kind: SchemeKind,
    pub n: u64,
}

impl ScalingScheme {
    pub fn new(kind: SchemeKind, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("scheme needs n >= 1"));
        }
        match kind {
            SchemeKind::Power { exponent, mu_per_n } => {
                if !(exponent > 0.0) || !mu_per_n.is_finite() {
                    return Err(invalid("power scheme needs exponent > 0"));
                }
            }
            SchemeKind::Constant { beta, mu } => {
                if !(beta > 0.0) || !beta.is_finite() || !mu.is_finite() {
                    return Err(invalid("constant scheme needs beta > 0"));
                }
            }
        }
        Ok(Self { kind, n })
    }

    pub fn identity() -> Self {
        Self { kind: SchemeKind::Constant { beta: 1.0, mu: 0.0 }, n: 1 }
    }

    /// Fluctuation scale: `β_n = 1/√n`, `μ_n = n μ`.
    pub fn gaussian(mean: f64, n: u64) -> Result<Self> {
        Self::new(SchemeKind::Power { exponent: 0.5, mu_per_n: mean }, n)
    }

    /// Large-deviation scale: `β_n = 1/n`, `μ_n = 0`, so `E_n = n I`.
    pub fn large_deviation(n: u64) -> Result<Self> {
        Self::new(SchemeKind::Power { exponent: 1.0, mu_per_n: 0.0 }, n)
    }

    pub fn at(&self, n: u64) -> Result<Self> {
        Self::new(self.kind, n)
    }

    pub fn beta(&self) -> f64 {
        match self.kind {
            SchemeKind::Power { exponent, .. } => {
                if exponent == 0.5 {
                    1.0 / (self.n as f64).sqrt()
                } else if exponent == 1.0 {
                    1.0 / self.n as f64
                } else {
                    (self.n as f64).powf(-exponent)
                }
            }
            SchemeKind::Constant { beta, .. } => beta,
        }
    }

    pub fn mu(&self) -> f64 {
        match self.kind {
            SchemeKind::Power { mu_per_n, .. } => self.n as f64 * mu_per_n,
            SchemeKind::Constant { mu, .. } => mu,
        }
    }

    /// `1/β_n`, exact for the square-root and linear schemes.
    pub fn inv_beta(&self) -> f64 {
        match self.kind {
            SchemeKind::Power { exponent: 1.0, .. } => self.n as f64,
            SchemeKind::Power { exponent: 0.5, .. } => (self.n as f64).sqrt(),
            _ => 1.0 / self.beta(),
        }
    }

    /// `E_n = [μ_n + h/β_n, μ_n + (h+δ)/β_n]`.
    pub fn condition_window(&self, i: &Interval) -> Interval {
        let s = self.inv_beta();
        let lo = self.mu() + i.lo() * s;
        let hi = self.mu() + i.hi() * s;
        Interval { h: lo, delta: hi - lo }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_keeps_width() {
        let i = Interval::new(0.4, 0.1).unwrap();
        let s = i.shift(0.25);
        assert_eq!(s.delta, i.delta);
        assert_eq!(s.h, 0.4 - 0.25);
    }

    #[test]
    fn rejects_invalid() {
        assert!(Interval::new(0.0, 0.0).unwrap().contains(0.0));
        assert!(Interval::new(0.0, -1.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn windows() {
        let i = Interval::new(0.4, 0.1).unwrap();
        let e = ScalingScheme::large_deviation(50).unwrap().condition_window(&i);
        assert_eq!(e.lo(), 20.0);
        assert!((e.hi() - 25.0).abs() < 1e-12);
        let g = Interval::new(-1.0, 0.5).unwrap();
        let e = ScalingScheme::gaussian(1.0, 100).unwrap().condition_window(&g);
        assert_eq!(e.lo(), 90.0);
        assert_eq!(e.hi(), 95.0);
        let id = ScalingScheme::identity().condition_window(&g);
        assert_eq!(id, g);
    }

    #[test]
    fn beta_vanishes() {
        let s = ScalingScheme::gaussian(0.0, 1).unwrap();
        let b: [f64; 3] = [1, 100, 10_000].map(|n| s.at(n).unwrap().beta());
        assert!(b[0] > b[1] && b[1] > b[2] && b[2] == 0.01);
    }
}
