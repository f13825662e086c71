//! Scalar root finding: safeguarded Newton with bisection fallback.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub const MAX_ITER: usize = 64;
pub const TOL: f64 = 1e-12;

/// Finds a bracket `[a, b]` with `f(a) <= 0 <= f(b)` for an increasing `f`
/// by doubling steps away from `start`, staying inside `(lo, hi)`.
pub fn bracket_increasing<F: FnMut(f64) -> f64>(mut f: F, start: f64, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let f0 = f(start);
    if f0 == 0.0 {
        return Ok((start, start));
    }
    let mut step = 1.0_f64.max(start.abs() * 0.1);
    let mut edge = start;
    for _ in 0..200 {
        let next = if f0 < 0.0 {
            let cand = edge + step;
            if cand >= hi {
                0.5 * (edge + hi)
            } else {
                cand
            }
        } else {
            let cand = edge - step;
            if cand <= lo {
                0.5 * (edge + lo)
            } else {
                cand
            }
        };
        let v = f(next);
        if v.is_finite() && (v >= 0.0) == (f0 < 0.0) {
            return Ok(if f0 < 0.0 { (edge, next) } else { (next, edge) });
        }
        if next == edge {
            break;
        }
        edge = next;
        step *= 2.0;
    }
    Err(Error::RootNotFound(alloc::format!("no sign change found from {start}")))
}

/// Solves `f(x) = 0` on a bracket `[a, b]` where `f(a) <= 0 <= f(b)`.
/// `fd` returns the value and derivative.
pub fn newton_bisect<F: FnMut(f64) -> (f64, f64)>(mut fd: F, mut a: f64, mut b: f64, x0: f64) -> Result<f64> {
    if a == b {
        return Ok(a);
    }
    let mut x = if x0 > a && x0 < b { x0 } else { 0.5 * (a + b) };
    for _ in 0..MAX_ITER {
        let (v, d) = fd(x);
        if v.abs() <= TOL {
            return Ok(x);
        }
        if v < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let newton = x - v / d;
        let next = if d.is_finite() && d != 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) {
            return Ok(next);
        }
        x = next;
    }
    // bisection tail for stubborn cases
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return Ok(m);
        }
        let (v, _) = fd(m);
        if v.abs() <= TOL {
            return Ok(m);
        }
        if v < 0.0 {
            a = m
        } else {
            b = m
        }
    }
    Ok(0.5 * (a + b))
}

/// Bisection on a monotone predicate: returns the boundary point between
/// `lo` (where `pred` is true) and `hi` (false) to relative precision `rel`.
pub fn bisect_boundary<P: FnMut(f64) -> bool>(mut pred: P, mut lo: f64, mut hi: f64, rel: f64) -> f64 {
    for _ in 0..2000 {
        if (hi - lo).abs() <= rel * hi.abs().max(lo.abs()).max(1e-300) {
            break;
        }
        let m = 0.5 * (lo + hi);
        if pred(m) {
            lo = m
        } else {
            hi = m
        }
    }
    lo
}
