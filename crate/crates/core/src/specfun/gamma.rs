//! Log-gamma, digamma and trigamma on the positive half-line.
//!
//! Digamma and trigamma shift the argument upward with the recurrences
//! `psi(x) = psi(x + 1) - 1/x` and `psi1(x) = psi1(x + 1) + 1/x^2` until it
//! reaches [`ASYMPTOTIC_FROM`], then sum the Bernoulli asymptotic series.

use std::sync::OnceLock;

use super::EULER_MASCHERONI;
use crate::error::{Error, Result};

const ASYMPTOTIC_FROM: f64 = 10.0;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

fn check_positive(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} requires a finite x > 0, got {x}")))
    }
}

/// Riemann zeta at integer arguments 2..=ZETA_MAX, by Euler-Maclaurin
/// summation cut at N = 50.
const ZETA_MAX: usize = 40;

fn zeta_table() -> &'static [f64; ZETA_MAX + 1] {
    static TABLE: OnceLock<[f64; ZETA_MAX + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        const N: f64 = 50.0;
        // B2/2!, B4/4!, B6/6!
        const B: [f64; 3] = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0];
        let mut table = [0.0; ZETA_MAX + 1];
        for (k, slot) in table.iter_mut().enumerate().skip(2) {
            let s = k as f64;
            let mut sum = 0.0;
            for n in (1..50).rev() {
                sum += (n as f64).powf(-s);
            }
            sum += N.powf(1.0 - s) / (s - 1.0) + 0.5 * N.powf(-s);
            // rising factorial s (s+1) ... (s + 2j - 2)
            let mut rising = s;
            for (j, b) in B.iter().enumerate() {
                sum += b * rising * N.powf(-s - (2 * j) as f64 - 1.0);
                rising *= (s + (2 * j) as f64 + 1.0) * (s + (2 * j) as f64 + 2.0);
            }
            *slot = sum;
        }
        table
    })
}

/// ln Gamma(1 + t) for |t| <= 1/4 via its Taylor series in zeta values.
fn ln_gamma_1p_small(t: f64) -> f64 {
    let zeta = zeta_table();
    let mut acc = 0.0;
    let mut power = t * t;
    for (k, z) in zeta.iter().enumerate().skip(2) {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * z * power / k as f64;
        power *= t;
        if power.abs() < 1e-18 * acc.abs() {
            break;
        }
    }
    acc - EULER_MASCHERONI * t
}

fn ln_gamma_stirling(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    let series = r
        * (1.0 / 12.0
            - r2 * (1.0 / 360.0
                - r2 * (1.0 / 1260.0
                    - r2 * (1.0 / 1680.0 - r2 * (1.0 / 1188.0 - r2 * (691.0 / 360_360.0))))));
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series
}

/// Natural logarithm of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    check_positive(x, "ln_gamma")?;
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    if (x - 1.0).abs() <= 0.25 {
        return ln_gamma_1p_small(x - 1.0);
    }
    if (x - 2.0).abs() <= 0.25 {
        let t = x - 2.0;
        return t.ln_1p() + ln_gamma_1p_small(t);
    }
    if x >= ASYMPTOTIC_FROM {
        return ln_gamma_stirling(x);
    }
    let mut z = x;
    let mut product = 1.0;
    while z < ASYMPTOTIC_FROM {
        product *= z;
        z += 1.0;
    }
    ln_gamma_stirling(z) - product.ln()
}

/// Digamma function psi(x) = d/dx ln Gamma(x), for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    check_positive(x, "digamma")?;
    Ok(digamma_unchecked(x))
}

pub(crate) fn digamma_unchecked(x: f64) -> f64 {
    let mut z = x;
    let mut shift = 0.0;
    while z < ASYMPTOTIC_FROM {
        shift += 1.0 / z;
        z += 1.0;
    }
    let r2 = 1.0 / (z * z);
    let series = r2
        * (1.0 / 12.0
            - r2 * (1.0 / 120.0
                - r2 * (1.0 / 252.0
                    - r2 * (1.0 / 240.0
                        - r2 * (1.0 / 132.0 - r2 * (691.0 / 32760.0 - r2 / 12.0))))));
    z.ln() - 0.5 / z - series - shift
}

/// Trigamma function psi_1(x) = d^2/dx^2 ln Gamma(x), for `x > 0`.
///
/// Strictly positive and strictly decreasing on `(0, inf)`.
pub fn trigamma(x: f64) -> Result<f64> {
    check_positive(x, "trigamma")?;
    Ok(trigamma_unchecked(x))
}

pub(crate) fn trigamma_unchecked(x: f64) -> f64 {
    let mut z = x;
    let mut shift = 0.0;
    while z < ASYMPTOTIC_FROM {
        shift += 1.0 / (z * z);
        z += 1.0;
    }
    let r = 1.0 / z;
    let r2 = r * r;
    // 1/z + 1/(2z^2) + sum_k B_{2k} / z^{2k+1}
    let series = r
        + 0.5 * r2
        + r * r2
            * (1.0 / 6.0
                - r2 * (1.0 / 30.0
                    - r2 * (1.0 / 42.0
                        - r2 * (1.0 / 30.0
                            - r2 * (5.0 / 66.0 - r2 * (691.0 / 2730.0 - r2 * (7.0 / 6.0)))))));
    series + shift
}

/// Six-term asymptotic approximation of the trigamma function,
///
/// `1/x + 1/(2x^2) + 1/(6x^3) - 1/(30x^5) + 1/(42x^7) - 1/(30x^9)`.
///
/// The truncation error is of order `x^-11`; at `x = 1` it is about 0.021.
pub fn trigamma_approx(x: f64) -> Result<f64> {
    check_positive(x, "trigamma_approx")?;
    let r = 1.0 / x;
    let r2 = r * r;
    Ok(r + 0.5 * r2 + r * r2 * (1.0 / 6.0 - r2 * (1.0 / 30.0 - r2 * (1.0 / 42.0 - r2 / 30.0))))
}

/// Lower end of the inverse-trigamma search interval.
pub const INVERSE_BRACKET_LO: f64 = 1e-6;
/// Upper end of the inverse-trigamma search interval.
pub const INVERSE_BRACKET_HI: f64 = 1e6;

/// Solves `trigamma(x) = eta` for `x > 0` by bisection on the bracket
/// `[1e-6, 1e6]`.
///
/// Bisection is geometric (midpoints in log space) since the bracket spans
/// twelve decades. Stops once `|trigamma(x) - eta| <= tol * max(1, eta)`.
pub fn trigamma_inverse_bracketed(eta: f64, tol: f64, max_iter: usize) -> Result<f64> {
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::domain("tolerance and iteration cap must be positive"));
    }
    if !eta.is_finite() || eta <= 0.0 {
        return Err(Error::NoBracket(eta));
    }
    let mut lo = INVERSE_BRACKET_LO;
    let mut hi = INVERSE_BRACKET_HI;
    if eta > trigamma_unchecked(lo) || eta < trigamma_unchecked(hi) {
        return Err(Error::NoBracket(eta));
    }
    let threshold = tol * eta.max(1.0);
    for _ in 0..max_iter {
        let mid = (lo * hi).sqrt();
        let residual = trigamma_unchecked(mid) - eta;
        if residual.abs() <= threshold {
            return Ok(mid);
        }
        if residual > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence(max_iter))
}

/// `ln(prod Gamma(num) / prod Gamma(den))` for positive arguments.
pub(crate) fn gamma_ratio_ln(num: &[f64], den: &[f64]) -> f64 {
    num.iter().map(|&v| ln_gamma_unchecked(v)).sum::<f64>()
        - den.iter().map(|&v| ln_gamma_unchecked(v)).sum::<f64>()
}
