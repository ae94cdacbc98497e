//! Regularized incomplete beta function, its inverse, and the Snedecor F
//! distribution built on top of them.

use super::gamma::ln_gamma_unchecked;
use crate::error::{Error, Result};

const CF_MAX_ITER: usize = 300;
const INVERSE_MAX_ITER: usize = 200;
const TINY: f64 = 1e-300;

/// Continued fraction for I_x(a, b) (modified Lentz).
fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= f64::EPSILON {
            break;
        }
    }
    h
}

/// I_x(a, b) with a precomputed `ln B(a, b)`.
fn reg_beta(x: f64, a: f64, b: f64, ln_beta: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let front = (a * x.ln() + b * (-x).ln_1p() - ln_beta).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b
    }
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma_unchecked(a) + ln_gamma_unchecked(b) - ln_gamma_unchecked(a + b)
}

/// Solves I_y(a, b) = p for y; intended for the lower half `p <= 0.5`.
fn solve_lower(p: f64, a: f64, b: f64, ln_beta: f64) -> Result<f64> {
    if p <= 0.0 {
        return Ok(0.0);
    }
    if p >= 1.0 {
        return Ok(1.0);
    }
    let mut y = initial_guess(p, a, b);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..INVERSE_MAX_ITER {
        let err = reg_beta(y, a, b, ln_beta) - p;
        if err == 0.0 {
            return Ok(y);
        }
        if err < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let log_density = (a - 1.0) * y.ln() + (b - 1.0) * (-y).ln_1p() - ln_beta;
        let density = log_density.exp();
        let mut next = f64::NAN;
        if density.is_finite() && density > 0.0 {
            // Halley step
            let newton = err / density;
            let curvature = (a - 1.0) / y - (b - 1.0) / (1.0 - y);
            let denom = 1.0 - 0.5 * (newton * curvature).min(1.0);
            next = y - newton / denom;
        }
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - y).abs();
        y = next;
        if step <= 1e-15 * y || hi - lo <= 4.0 * f64::EPSILON * y {
            return Ok(y);
        }
    }
    Err(Error::NoConvergence(INVERSE_MAX_ITER))
}

fn initial_guess(p: f64, a: f64, b: f64) -> f64 {
    let guess = if a >= 1.0 && b >= 1.0 {
        // normal approximation
        let pp = if p < 0.5 { p } else { 1.0 - p };
        let t = (-2.0 * pp.ln()).sqrt();
        let mut x = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t;
        if p < 0.5 {
            x = -x;
        }
        let al = (x * x - 3.0) / 6.0;
        let h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0));
        let w = x * (al + h).sqrt() / h
            - (1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0)) * (al + 5.0 / 6.0 - 2.0 / (3.0 * h));
        a / (a + b * (2.0 * w).exp())
    } else {
        let lna = (a / (a + b)).ln();
        let lnb = (b / (a + b)).ln();
        let t = (a * lna).exp() / a;
        let u = (b * lnb).exp() / b;
        let w = t + u;
        if p < t / w {
            (a * w * p).powf(1.0 / a)
        } else {
            1.0 - (b * w * (1.0 - p)).powf(1.0 / b)
        }
    };
    if guess > 0.0 && guess < 1.0 {
        guess
    } else {
        0.5
    }
}

/// Regularized incomplete beta function with cached `ln B(a, b)`.
#[derive(Debug, Clone, Copy)]
pub struct IncompleteBeta {
    a: f64,
    b: f64,
    ln_beta: f64,
}

impl IncompleteBeta {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0 && b.is_finite() && b > 0.0) {
            return Err(Error::domain(format!(
                "incomplete beta requires a, b > 0, got a = {a}, b = {b}"
            )));
        }
        Ok(Self {
            a,
            b,
            ln_beta: ln_beta(a, b),
        })
    }

    /// I_x(a, b), clamped to 0 and 1 outside the unit interval.
    pub fn eval(&self, x: f64) -> f64 {
        reg_beta(x, self.a, self.b, self.ln_beta)
    }

    /// Returns `(y, 1 - y)` with `I_y(a, b) = u`.
    ///
    /// The upper half `u > 0.5` is solved through the mirrored function
    /// `I_{1-y}(b, a) = 1 - u`, so `1 - y` keeps full relative precision in
    /// the right tail.
    pub fn inverse_pair(&self, u: f64) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::domain(format!("probability must be in [0, 1], got {u}")));
        }
        if u <= 0.5 {
            let y = solve_lower(u, self.a, self.b, self.ln_beta)?;
            Ok((y, 1.0 - y))
        } else {
            let w = solve_lower(1.0 - u, self.b, self.a, self.ln_beta)?;
            Ok((1.0 - w, w))
        }
    }

    pub fn inverse(&self, u: f64) -> Result<f64> {
        self.inverse_pair(u).map(|(y, _)| y)
    }
}

/// Regularized incomplete beta I_x(a, b).
pub fn reg_incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("x must be in [0, 1], got {x}")));
    }
    Ok(IncompleteBeta::new(a, b)?.eval(x))
}

/// Inverse of the regularized incomplete beta function in its first argument.
pub fn inv_reg_incomplete_beta(u: f64, a: f64, b: f64) -> Result<f64> {
    IncompleteBeta::new(a, b)?.inverse(u)
}

/// Snedecor F distribution with `d1` and `d2` degrees of freedom.
#[derive(Debug, Clone, Copy)]
pub struct FDistribution {
    d1: f64,
    d2: f64,
    beta: IncompleteBeta,
}

impl FDistribution {
    pub fn new(d1: f64, d2: f64) -> Result<Self> {
        if !(d1.is_finite() && d1 > 0.0 && d2.is_finite() && d2 > 0.0) {
            return Err(Error::domain(format!(
                "F distribution requires positive degrees of freedom, got {d1}, {d2}"
            )));
        }
        Ok(Self {
            d1,
            d2,
            beta: IncompleteBeta::new(0.5 * d1, 0.5 * d2)?,
        })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x == f64::INFINITY {
            return 1.0;
        }
        let scaled = self.d1 * x;
        let y = scaled / (scaled + self.d2);
        if y <= 0.5 {
            self.beta.eval(y)
        } else {
            // I_y(a, b) = 1 - I_{1-y}(b, a)
            let mirrored = IncompleteBeta {
                a: self.beta.b,
                b: self.beta.a,
                ln_beta: self.beta.ln_beta,
            };
            1.0 - mirrored.eval(self.d2 / (scaled + self.d2))
        }
    }

    /// Quantile function; `u = 1` maps to infinity and is rejected.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::domain(format!(
                "F quantile requires 0 <= u < 1, got {u}"
            )));
        }
        if u == 0.0 {
            return Ok(0.0);
        }
        let (y, y_comp) = self.beta.inverse_pair(u)?;
        Ok(self.d2 * y / (self.d1 * y_comp))
    }
}

/// F(d1, d2) quantile at probability `u`.
pub fn f_quantile(u: f64, d1: f64, d2: f64) -> Result<f64> {
    FDistribution::new(d1, d2)?.quantile(u)
}

/// F(d1, d2) cumulative distribution function.
pub fn f_cdf(x: f64, d1: f64, d2: f64) -> Result<f64> {
    Ok(FDistribution::new(d1, d2)?.cdf(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundaries() {
        assert_eq!(inv_reg_incomplete_beta(0.0, 2.0, 3.0).unwrap(), 0.0);
        assert_eq!(inv_reg_incomplete_beta(1.0, 2.0, 3.0).unwrap(), 1.0);
        assert!((inv_reg_incomplete_beta(0.3, 1.0, 1.0).unwrap() - 0.3).abs() < 1e-14);
    }

    #[test]
    fn symmetric_beta_median() {
        let y = inv_reg_incomplete_beta(0.5, 2.0, 2.0).unwrap();
        assert!((y - 0.5).abs() < 1e-12);
        assert!((reg_incomplete_beta(y, 2.0, 2.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn closed_forms() {
        // I_x(1, b) = 1 - (1 - x)^b ; I_x(a, 1) = x^a
        for &x in &[0.01, 0.2, 0.5, 0.8, 0.99] {
            let v = reg_incomplete_beta(x, 1.0, 3.5).unwrap();
            assert!((v - (1.0 - (1.0 - x).powf(3.5))).abs() < 1e-14);
            let v = reg_incomplete_beta(x, 2.5, 1.0).unwrap();
            assert!((v - x.powf(2.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(inv_reg_incomplete_beta(-0.1, 1.0, 1.0).is_err());
        assert!(inv_reg_incomplete_beta(1.1, 1.0, 1.0).is_err());
        assert!(inv_reg_incomplete_beta(0.5, 0.0, 1.0).is_err());
        assert!(inv_reg_incomplete_beta(0.5, 1.0, -1.0).is_err());
        assert!(f_quantile(1.0, 2.0, 4.0).is_err());
        assert!(f_quantile(0.5, 0.0, 4.0).is_err());
    }

    #[test]
    fn inverse_relative_tolerance_over_parameter_grid() {
        for &a in &[0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
            for &b in &[0.75, 1.5, 3.0, 5.0, 10.0, 30.0] {
                let ib = IncompleteBeta::new(a, b).unwrap();
                for &u in &[1e-12, 1e-6, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 1.0 - 1e-9] {
                    let (y, yc) = ib.inverse_pair(u).unwrap();
                    let back = if u <= 0.5 {
                        ib.eval(y)
                    } else {
                        1.0 - IncompleteBeta::new(b, a).unwrap().eval(yc)
                    };
                    let tail = u.min(1.0 - u);
                    assert!(
                        (back - u).abs() <= 1e-10 * tail,
                        "a={a} b={b} u={u} back={back}"
                    );
                }
            }
        }
    }

    #[test]
    fn f_median_round_trip() {
        let x = f_quantile(0.5, 2.0, 4.0).unwrap();
        assert!((f_cdf(x, 2.0, 4.0).unwrap() - 0.5).abs() <= 1e-9);
        // F(2, 4) has a closed-form cdf: 1 - (1 + x/2)^-2
        let closed = 1.0 - (1.0 + x / 2.0).powi(-2);
        assert!((closed - 0.5).abs() < 1e-12);
    }

    #[test]
    fn f_quantile_monotone_and_zero() {
        assert_eq!(f_quantile(0.0, 3.0, 7.0).unwrap(), 0.0);
        let mut prev = 0.0;
        for i in 1..100 {
            let q = f_quantile(i as f64 / 100.0, 3.0, 7.0).unwrap();
            assert!(q > prev);
            prev = q;
        }
    }
}
