//! Numerical integration: adaptive Gauss–Kronrod (7/15) on finite and
//! infinite ranges, Gauss–Legendre rules, and composite quadrature grids.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadTol {
    pub abs: f64,
    pub rel: f64,
    pub max_segments: usize,
}

impl Default for QuadTol {
    fn default() -> Self {
        Self { abs: 1e-14, rel: 1e-12, max_segments: 4000 }
    }
}

impl QuadTol {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel, ..Self::default() }
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        resk += WGK[j] * s;
        if j % 2 == 1 {
            resg += WG[j / 2] * s;
        }
    }
    let value = resk * half;
    let err = ((resk - resg) * half).abs();
    (value, err)
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

fn integrate_finite<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: QuadTol) -> Result<Quad> {
    if a == b {
        return Ok(Quad { value: 0.0, error: 0.0 });
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, error: e });
    let mut total = v;
    let mut total_err = e;
    let mut segments = 1;
    while total_err > tol.abs.max(tol.rel * total.abs()) {
        if segments >= tol.max_segments {
            return Err(Error::QuadratureNotConverged { value: total, error: total_err });
        }
        let seg = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // interval exhausted at machine precision
            heap.push(seg);
            break;
        }
        let (v1, e1) = gk15(&mut f, seg.a, mid);
        let (v2, e2) = gk15(&mut f, mid, seg.b);
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
        segments += 1;
    }
    // Re-sum to shed accumulated cancellation.
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    if !value.is_finite() {
        return Err(Error::QuadratureNotConverged { value, error });
    }
    Ok(Quad { value, error })
}

/// Adaptive integration of `f` over `[a, b]`; either bound may be infinite.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: QuadTol) -> Result<Quad> {
    if a > b {
        return integrate(f, b, a, tol).map(|q| Quad { value: -q.value, error: q.error });
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => integrate_finite(f, a, b, tol),
        (true, false) => integrate_finite(
            |t| {
                let s = 1.0 - t;
                let v = f(a + t / s);
                if v == 0.0 {
                    0.0
                } else {
                    v / (s * s)
                }
            },
            0.0,
            1.0 - 1e-15,
            tol,
        ),
        (false, true) => integrate_finite(
            |t| {
                let s = 1.0 - t;
                let v = f(b - t / s);
                if v == 0.0 {
                    0.0
                } else {
                    v / (s * s)
                }
            },
            0.0,
            1.0 - 1e-15,
            tol,
        ),
        (false, false) => integrate_finite(
            |t| {
                let s = 1.0 - t * t;
                let v = f(t / s);
                if v == 0.0 {
                    0.0
                } else {
                    v * (1.0 + t * t) / (s * s)
                }
            },
            -1.0 + 1e-15,
            1.0 - 1e-15,
            tol,
        ),
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / dp;
            if (z - z1).abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Layout of a composite Gauss–Legendre grid: `[lo, hi]` split into equal
/// panels, with extra panel edges at every breakpoint inside the range.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub panels: usize,
    pub order: usize,
    pub breakpoints: Vec<f64>,
}

/// Composite quadrature grid: nodes with their weights, in increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub spec: GridSpec,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, panels: usize, order: usize) -> Self {
        Self { lo, hi, panels, order, breakpoints: Vec::new() }
    }

    pub fn with_breakpoints(mut self, points: &[f64]) -> Self {
        self.breakpoints.extend_from_slice(points);
        self
    }

    pub fn refined(&self) -> Self {
        Self { panels: self.panels * 2, ..self.clone() }
    }

    pub fn edges(&self) -> Vec<f64> {
        let mut edges: Vec<f64> =
            (0..=self.panels).map(|i| self.lo + (self.hi - self.lo) * i as f64 / self.panels as f64).collect();
        let span = self.hi - self.lo;
        for &b in &self.breakpoints {
            if b > self.lo && b < self.hi {
                edges.push(b);
            }
        }
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * span);
        edges
    }

    pub fn build(&self) -> Grid {
        let (gx, gw) = gauss_legendre(self.order);
        let edges = self.edges();
        let mut nodes = Vec::with_capacity((edges.len() - 1) * self.order);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let c = 0.5 * (a + b);
            let h = 0.5 * (b - a);
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(c + h * x);
                weights.push(h * w);
            }
        }
        Grid { spec: self.clone(), nodes, weights }
    }
}

impl Grid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn sum_values(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_polynomial_exact() {
        let q = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, QuadTol::default()).unwrap();
        assert!((q.value - 0.0).abs() < 1e-13);
    }

    #[test]
    fn gk_gaussian_infinite() {
        let q = integrate(|x| (-0.5 * x * x).exp(), f64::NEG_INFINITY, f64::INFINITY, QuadTol::default()).unwrap();
        assert!((q.value - (2.0 * core::f64::consts::PI).sqrt()).abs() < 1e-11);
    }

    #[test]
    fn gk_half_line() {
        let q = integrate(|x| (-x).exp(), 0.0, f64::INFINITY, QuadTol::default()).unwrap();
        assert!((q.value - 1.0).abs() < 1e-12);
        let q = integrate(|x| x.exp(), f64::NEG_INFINITY, 0.0, QuadTol::default()).unwrap();
        assert!((q.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gk_reports_non_convergence() {
        let tol = QuadTol { abs: 0.0, rel: 0.0, max_segments: 10 };
        let err = integrate(|x| x.sqrt().recip(), 0.0, 1.0, tol).unwrap_err();
        assert!(matches!(err, Error::QuadratureNotConverged { .. }));
    }

    #[test]
    fn legendre_weights_sum_to_two() {
        for order in [1, 2, 5, 16, 33] {
            let (x, w) = gauss_legendre(order);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            // integrates x^(2n-1) and x^(2n-2) exactly
            let deg = 2 * order - 2;
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((got - 2.0 / (deg as f64 + 1.0)).abs() < 1e-12, "order {order}");
        }
    }

    #[test]
    fn grid_includes_breakpoints() {
        let g = GridSpec::new(0.0, 1.0, 4, 3).with_breakpoints(&[0.3, 2.0]).build();
        assert_eq!(g.len(), 5 * 3);
        let kinked = g.integrate(|x| (x - 0.3).abs());
        assert!((kinked - (0.045 + 0.245)).abs() < 1e-14);
    }
}
