//! Standard normal helpers for the truncated-normal posterior mean.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::erfc;

const CF_TERMS: usize = 200;

/// Below this argument the posterior mean is evaluated by continued fraction.
const CONTINUED_FRACTION_BELOW: f64 = -6.0;

pub fn std_normal_pdf(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
}

pub fn std_normal_cdf(t: f64) -> f64 {
    0.5 * erfc(-t * FRAC_1_SQRT_2)
}

/// Mean of a unit-variance normal with location `t` truncated to `(0, inf)`,
/// i.e. `t + pdf(t) / cdf(t)`.
///
/// For very negative `t` both terms nearly cancel, so the sum is taken from
/// the continued fraction `1 / (x + 2 / (x + 3 / (x + ...)))` with `x = -t`,
/// which follows from Laplace's expansion of the Mills ratio.
pub fn truncated_normal_mean(t: f64) -> f64 {
    if t >= CONTINUED_FRACTION_BELOW {
        t + inverse_mills(t)
    } else {
        shifted_mills_continued_fraction(-t)
    }
}

/// Mean of `N(mu, sigma^2)` truncated to `(0, inf)`, for `sigma > 0`:
/// `mu + sigma * pdf(mu / sigma) / cdf(mu / sigma)`.
///
/// Strictly positive for finite arguments and never below `mu`.
pub fn positive_truncated_mean(mu: f64, sigma: f64) -> f64 {
    let t = mu / sigma;
    if t >= CONTINUED_FRACTION_BELOW {
        mu + sigma * inverse_mills(t)
    } else {
        sigma * shifted_mills_continued_fraction(-t)
    }
}

/// `pdf(t) / cdf(t)` for moderate `t`.
pub fn inverse_mills(t: f64) -> f64 {
    std_normal_pdf(t) / std_normal_cdf(t)
}

/// `1 / (x + 2 / (x + 3 / (x + ...)))`, evaluated backward from a fixed depth.
/// For `x >= 6` the truncation error is far below `f64` resolution.
fn shifted_mills_continued_fraction(x: f64) -> f64 {
    let mut tail = 0.0;
    for k in (2..=CF_TERMS).rev() {
        tail = k as f64 / (x + tail);
    }
    1.0 / (x + tail)
}
