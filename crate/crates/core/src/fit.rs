//! Least-squares power-law fits on log-log axes.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r2: f64,
    pub points: usize,
}

/// Ordinary least squares of `ln value` on `ln n`; needs at least four
/// positive values.
pub fn fit_loglog(rows: &[(f64, f64)]) -> Result<LogLogFit> {
    if rows.len() < 4 {
        return Err(Error::InvalidParameter("log-log fit needs at least 4 points".into()));
    }
    for (index, &(n, v)) in rows.iter().enumerate() {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonPositiveValue { index, value: v });
        }
        if !(n > 0.0) {
            return Err(Error::NonPositiveValue { index, value: n });
        }
    }
    let k = rows.len() as f64;
    let xs = rows.iter().map(|r| r.0.ln());
    let ys = rows.iter().map(|r| r.1.ln());
    let mx = xs.clone().sum::<f64>() / k;
    let my = ys.clone().sum::<f64>() / k;
    let sxx: f64 = xs.clone().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.clone().zip(ys.clone()).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.clone().map(|y| (y - my) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidParameter("log-log fit needs distinct n values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let slope_stderr = (sse / (k - 2.0) / sxx).sqrt();
    Ok(LogLogFit { slope, intercept, slope_stderr, r2, points: rows.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_power_laws() {
        let rows: alloc::vec::Vec<_> = [4.0, 16.0, 64.0, 256.0].iter().map(|&n: &f64| (n, 3.0 / n)).collect();
        let f = fit_loglog(&rows).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        let rows: alloc::vec::Vec<_> = [4.0, 16.0, 64.0, 256.0].iter().map(|&n: &f64| (n, 2.0 / n.sqrt())).collect();
        assert!((fit_loglog(&rows).unwrap().slope + 0.5).abs() < 1e-12);
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: alloc::vec::Vec<_> = (0..8)
            .map(|j| {
                let n = 16.0 * 2f64.powi(j);
                let noise = 1.0 + 0.05 * (2.0 * rng.random::<f64>() - 1.0);
                (n, noise / n.sqrt())
            })
            .collect();
        let f = fit_loglog(&rows).unwrap();
        assert!((f.slope + 0.5).abs() < 0.1);
    }

    #[test]
    fn rejects_bad_input() {
        let rows = [(1.0, 1.0), (2.0, 0.0), (3.0, 1.0), (4.0, 1.0)];
        assert!(matches!(fit_loglog(&rows), Err(Error::NonPositiveValue { index: 1, .. })));
        assert!(fit_loglog(&rows[..3]).is_err());
    }
}
