//! Roots of the roughness polynomial
//!
//! `P(a) = 210 eta a^7 + 210 a^6 - 105 a^5 + 35 a^4 - 7 a^2 + 5`,
//!
//! obtained from `trigamma(-a) = eta` by replacing the trigamma function
//! with its asymptotic expansion truncated after the `x^-7` term and
//! clearing denominators. The roots are the eigenvalues of the companion
//! matrix of the monic polynomial, found by balancing followed by the
//! Francis double-shift QR iteration on the (already Hessenberg) matrix.

pub use num_complex::Complex;

use crate::error::{Error, Result};

pub const ROUGHNESS_DEGREE: usize = 7;

/// Imaginary parts below this fraction of `max(1, |Re|)` count as rounding
/// noise.
pub const REAL_ROOT_TOLERANCE: f64 = 1e-9;

/// Coefficients of the roughness polynomial, highest degree first.
pub fn roughness_polynomial_coefficients(eta_m: f64) -> [f64; ROUGHNESS_DEGREE + 1] {
    [210.0 * eta_m, 210.0, -105.0, 35.0, 0.0, -7.0, 0.0, 5.0]
}

/// Horner evaluation of a real polynomial (highest degree first) at a
/// complex point.
pub fn eval_polynomial(coefficients: &[f64], z: Complex<f64>) -> Complex<f64> {
    coefficients
        .iter()
        .fold(Complex::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// All roots of a polynomial, with multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyRoots {
    pub roots: Vec<Complex<f64>>,
}

impl PolyRoots {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Real parts of the roots whose imaginary part is rounding noise.
    pub fn real_roots(&self) -> impl Iterator<Item = f64> + '_ {
        self.roots
            .iter()
            .filter(|r| r.im.abs() <= REAL_ROOT_TOLERANCE * r.re.abs().max(1.0))
            .map(|r| r.re)
    }
}

/// Roots of the roughness polynomial for a given (positive) `eta_m`.
pub fn solve_roughness_polynomial(eta_m: f64) -> Result<PolyRoots> {
    if !eta_m.is_finite() || eta_m <= 0.0 {
        return Err(Error::DegenerateLeadingCoefficient(eta_m));
    }
    polynomial_roots(&roughness_polynomial_coefficients(eta_m))
}

/// Roots of a degree-7 polynomial (highest degree first, nonzero leading
/// coefficient) as companion-matrix eigenvalues.
pub fn polynomial_roots(coefficients: &[f64; ROUGHNESS_DEGREE + 1]) -> Result<PolyRoots> {
    const N: usize = ROUGHNESS_DEGREE;
    let lead = coefficients[0];
    if !lead.is_finite() || lead == 0.0 {
        return Err(Error::DegenerateLeadingCoefficient(lead));
    }
    // 1-based storage; row and column 0 are unused.
    let mut a = [[0.0f64; N + 1]; N + 1];
    for (j, &c) in coefficients[1..].iter().enumerate() {
        a[1][j + 1] = -c / lead;
    }
    for i in 2..=N {
        a[i][i - 1] = 1.0;
    }
    balance(&mut a);
    let (wr, wi) = hessenberg_eigenvalues(&mut a)?;
    let roots = (1..=N).map(|i| Complex::new(wr[i], wi[i])).collect();
    Ok(PolyRoots { roots })
}

/// Diagonal similarity scaling by powers of two so that row and column norms
/// are comparable. Keeps Hessenberg structure.
fn balance<const M: usize>(a: &mut [[f64; M]; M]) {
    const RADIX: f64 = 2.0;
    let n = M - 1;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let (mut r, mut c) = (0.0, 0.0);
            for j in (1..=n).filter(|&j| j != i) {
                c += a[j][i].abs();
                r += a[i][j].abs();
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 1..=n {
                    a[i][j] /= f;
                    a[j][i] *= f;
                }
            }
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix (1-based, destroyed), as real
/// and imaginary parts. Complex pairs appear in adjacent slots.
#[allow(clippy::many_single_char_names)]
fn hessenberg_eigenvalues<const M: usize>(a: &mut [[f64; M]; M]) -> Result<([f64; M], [f64; M])> {
    const MAX_ITS: usize = 60;
    let n = M - 1;
    let mut wr = [0.0; M];
    let mut wi = [0.0; M];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in (i - 1).max(1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n;
    let mut t = 0.0;
    while nn >= 1 {
        let mut its = 0;
        loop {
            // look for a negligible subdiagonal element
            let mut l = nn;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nn][nn];
            if l == nn {
                // one root found
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a[nn - 1][nn - 1];
            let mut w = a[nn][nn - 1] * a[nn - 1][nn];
            if l == nn - 1 {
                // two roots found
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + z.copysign(p);
                    wr[nn - 1] = x + z;
                    wr[nn] = if z != 0.0 { x - w / z } else { x + z };
                    wi[nn - 1] = 0.0;
                    wi[nn] = 0.0;
                } else {
                    wr[nn - 1] = x + p;
                    wr[nn] = x + p;
                    wi[nn - 1] = -z;
                    wi[nn] = z;
                }
                nn = nn.saturating_sub(2);
                break;
            }
            if its == MAX_ITS {
                return Err(Error::NoConvergence(MAX_ITS));
            }
            if its == 10 || its == 20 {
                // exceptional shift
                t += x;
                for i in 1..=nn {
                    a[i][i] -= x;
                }
                let s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            // look for two consecutive small subdiagonal elements
            let mut m = nn - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[m][m];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - rr - ss;
                r = a[m + 2][m + 1];
                let inv = 1.0 / (p.abs() + q.abs() + r.abs());
                p *= inv;
                q *= inv;
                r *= inv;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nn {
                a[i][i - 2] = 0.0;
                if i != m + 2 {
                    a[i][i - 3] = 0.0;
                }
            }
            // double QR step on rows l..nn and columns m..nn
            for k in m..nn {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = if k != nn - 1 { a[k + 2][k - 1] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        let inv = 1.0 / x;
                        p *= inv;
                        q *= inv;
                        r *= inv;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        a[k][k - 1] = -a[k][k - 1];
                    }
                } else {
                    a[k][k - 1] = -s * x;
                }
                p += s;
                let inv_s = 1.0 / s;
                x = p * inv_s;
                y = q * inv_s;
                let z = r * inv_s;
                let inv_p = 1.0 / p;
                q *= inv_p;
                r *= inv_p;
                for j in k..=nn {
                    let mut pp = a[k][j] + q * a[k + 1][j];
                    if k != nn - 1 {
                        pp += r * a[k + 2][j];
                        a[k + 2][j] -= pp * z;
                    }
                    a[k + 1][j] -= pp * y;
                    a[k][j] -= pp * x;
                }
                let mmin = nn.min(k + 3);
                for i in l..=mmin {
                    let mut pp = x * a[i][k] + y * a[i][k + 1];
                    if k != nn - 1 {
                        pp += z * a[i][k + 2];
                        a[i][k + 2] -= pp * r;
                    }
                    a[i][k + 1] -= pp * q;
                    a[i][k] -= pp;
                }
            }
            if l >= nn - 1 {
                break;
            }
        }
    }
    Ok((wr, wi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{trigamma, trigamma_inverse_bracketed};

    fn admissible(roots: &PolyRoots) -> Vec<f64> {
        roots.real_roots().filter(|&r| r < 0.0 && r >= -15.0).collect()
    }

    #[test]
    fn seven_roots_with_small_residual() {
        for &x in &[1.5, 2.0, 3.0, 5.0, 8.0, 15.0] {
            let eta = trigamma(x).unwrap();
            let roots = solve_roughness_polynomial(eta).unwrap();
            assert_eq!(roots.len(), 7);
            let coefficients = roughness_polynomial_coefficients(eta);
            for r in &roots.roots {
                let residual = eval_polynomial(&coefficients, *r).norm();
                assert!(residual <= 1e-6 * 210.0 * eta.max(1.0), "x={x} r={r} res={residual}");
            }
        }
    }

    #[test]
    fn single_admissible_root_near_three() {
        let eta = trigamma(3.0).unwrap();
        let roots = admissible(&solve_roughness_polynomial(eta).unwrap());
        assert_eq!(roots.len(), 1);
        assert!((roots[0] + 3.0).abs() <= 5e-3, "{roots:?}");
        let reference = trigamma_inverse_bracketed(eta, 1e-12, 200).unwrap();
        assert!((roots[0] + reference).abs() <= 5e-3);
    }

    #[test]
    fn admissible_root_near_one_and_a_half() {
        let eta = trigamma(1.5).unwrap();
        let roots = admissible(&solve_roughness_polynomial(eta).unwrap());
        assert_eq!(roots.len(), 1);
        assert!((roots[0] + 1.5).abs() <= 2e-2, "{roots:?}");
    }

    #[test]
    fn matches_library_eigenvalues() {
        for &eta in &[1e-4, 0.01, 0.2, 0.6449, 1.0, 3.0, 50.0, 1e4] {
            let ours = solve_roughness_polynomial(eta).unwrap();
            let c = roughness_polynomial_coefficients(eta);
            let mut m = nalgebra::SMatrix::<f64, 7, 7>::zeros();
            for j in 0..7 {
                m[(0, j)] = -c[j + 1] / c[0];
            }
            for i in 1..7 {
                m[(i, i - 1)] = 1.0;
            }
            let reference: Vec<Complex<f64>> = m.complex_eigenvalues().iter().copied().collect();
            for r in &reference {
                let nearest = ours.roots.iter().map(|o| (o - r).norm()).fold(f64::INFINITY, f64::min);
                assert!(nearest <= 1e-8 * r.norm().max(1.0), "eta={eta} r={r} ours={:?}", ours.roots);
            }
        }
    }

    #[test]
    fn cubic_with_known_roots() {
        // (x - 1)(x + 2)(x - 3)(x^2 + 1)(x + 0.5)(x - 7)
        let mut c = vec![1.0];
        for factor in [vec![1.0, -1.0], vec![1.0, 2.0], vec![1.0, -3.0], vec![1.0, 0.0, 1.0], vec![1.0, 0.5], vec![1.0, -7.0]] {
            let mut next = vec![0.0; c.len() + factor.len() - 1];
            for (i, a) in c.iter().enumerate() {
                for (j, b) in factor.iter().enumerate() {
                    next[i + j] += a * b;
                }
            }
            c = next;
        }
        let coefficients: [f64; 8] = c.try_into().unwrap();
        let roots = polynomial_roots(&coefficients).unwrap();
        let mut real: Vec<f64> = roots.real_roots().collect();
        real.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected = [-2.0, -0.5, 1.0, 3.0, 7.0];
        assert_eq!(real.len(), 5);
        for (r, e) in real.iter().zip(expected) {
            assert!((r - e).abs() < 1e-10, "{real:?}");
        }
        let complex: Vec<_> = roots.roots.iter().filter(|r| r.im.abs() > 0.5).collect();
        assert_eq!(complex.len(), 2);
        assert!(complex.iter().all(|r| r.re.abs() < 1e-10 && (r.im.abs() - 1.0).abs() < 1e-10));
    }

    #[test]
    fn degenerate_leading_coefficient() {
        for eta in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                solve_roughness_polynomial(eta),
                Err(Error::DegenerateLeadingCoefficient(_))
            ));
        }
    }

    #[test]
    fn real_root_filter_uses_relative_tolerance() {
        let roots = PolyRoots {
            roots: vec![
                Complex::new(-3.0, 1e-10),
                Complex::new(-3000.0, 1e-7),
                Complex::new(-3.0, 1e-6),
            ],
        };
        let real: Vec<f64> = roots.real_roots().collect();
        assert_eq!(real, vec![-3.0, -3000.0]);
    }
}
