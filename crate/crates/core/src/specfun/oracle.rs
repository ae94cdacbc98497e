//! Series oracles for the gamma-family functions and the quantile round
//! trip. These use none of the recurrence/asymptotic code in [`super::gamma`]
//! beyond what is stated here, and back the `specfun-check` command.

use super::{f_cdf, f_quantile, trigamma, digamma, EULER_MASCHERONI};
use crate::error::Result;

const TERMS: usize = 2000;

/// Neumaier compensated sum of the values in order.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// `sum_{k >= 0} 1 / (x + k)^2`: partial sum up to `TERMS` plus the
/// Euler-Maclaurin tail `1/y + 1/(2y^2) + 1/(6y^3) - 1/(30y^5)` at
/// `y = x + TERMS`, whose remainder is below `1/(42 y^7)`.
pub fn trigamma_series(x: f64) -> f64 {
    let y = x + TERMS as f64;
    let tail = 1.0 / y + 0.5 / (y * y) + 1.0 / (6.0 * y * y * y) - 1.0 / (30.0 * y.powi(5));
    let head = compensated_sum((0..TERMS).rev().map(|k| {
        let d = x + k as f64;
        1.0 / (d * d)
    }));
    head + tail
}

/// `-tau + sum_{k >= 0} [1/(k + 1) - 1/(k + x)]` with an Euler-Maclaurin tail.
pub fn digamma_series(x: f64) -> f64 {
    let n = TERMS as f64;
    // f(k) = 1/(k+1) - 1/(k+x); tail = int_n^inf f + f(n)/2 - f'(n)/12 + f'''(n)/720
    let a = n + 1.0;
    let b = n + x;
    let integral = (b / a).ln();
    let f = 1.0 / a - 1.0 / b;
    let f1 = -1.0 / (a * a) + 1.0 / (b * b);
    let f3 = -6.0 / a.powi(4) + 6.0 / b.powi(4);
    let tail = integral + 0.5 * f - f1 / 12.0 + f3 / 720.0;
    let head = compensated_sum((0..TERMS).rev().map(|k| {
        let k = k as f64;
        1.0 / (k + 1.0) - 1.0 / (k + x)
    }));
    -EULER_MASCHERONI + head + tail
}

/// Log-spaced grid of `count` points over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let step = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|i| lo * (step * i as f64).exp()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub max_rel_trigamma: f64,
    pub max_rel_digamma: f64,
    pub max_abs_quantile: f64,
}

/// Runs the series oracles on 200 log-spaced points in `[0.5, 100]` and the
/// F-quantile round trip over a small parameter grid.
pub fn run_checks() -> Result<OracleReport> {
    let mut max_rel_trigamma = 0.0f64;
    let mut max_rel_digamma = 0.0f64;
    for x in log_grid(0.5, 100.0, 200) {
        let t = trigamma(x)?;
        max_rel_trigamma = max_rel_trigamma.max(((t - trigamma_series(x)) / t).abs());
        let d = digamma(x)?;
        let reference = digamma_series(x);
        max_rel_digamma = max_rel_digamma.max(((d - reference) / reference).abs());
    }
    let mut max_abs_quantile = 0.0f64;
    for &(d1, d2) in &[(2.0, 3.0), (2.0, 4.0), (6.0, 10.0), (16.0, 3.0)] {
        for &u in &[0.01, 0.1, 0.5, 0.9, 0.99] {
            let x = f_quantile(u, d1, d2)?;
            max_abs_quantile = max_abs_quantile.max((f_cdf(x, d1, d2)? - u).abs());
        }
    }
    Ok(OracleReport {
        max_rel_trigamma,
        max_rel_digamma,
        max_abs_quantile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn series_fixed_points() {
        assert!((trigamma_series(1.0) - PI * PI / 6.0).abs() < 1e-15);
        assert!((digamma_series(1.0) + EULER_MASCHERONI).abs() < 1e-15);
    }

    #[test]
    fn checks_pass() {
        let report = run_checks().unwrap();
        assert!(report.max_rel_trigamma <= 1e-12, "{report:?}");
        assert!(report.max_rel_digamma <= 1e-12, "{report:?}");
        assert!(report.max_abs_quantile <= 1e-9, "{report:?}");
    }
}
