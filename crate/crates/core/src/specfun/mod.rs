//! Special functions used by the estimators and the sampler.

mod beta;
mod gamma;
mod normal;
pub mod oracle;
mod poly;

pub use beta::{
    f_cdf, f_quantile, inv_reg_incomplete_beta, reg_incomplete_beta, FDistribution,
    IncompleteBeta,
};
pub use gamma::{
    digamma, ln_gamma, trigamma, trigamma_approx, trigamma_inverse_bracketed,
    INVERSE_BRACKET_HI, INVERSE_BRACKET_LO,
};
pub(crate) use gamma::{digamma_unchecked, gamma_ratio_ln, trigamma_unchecked};
pub use normal::{
    positive_truncated_mean, std_normal_cdf, std_normal_pdf, truncated_normal_mean,
};
pub use poly::{
    eval_polynomial, polynomial_roots, roughness_polynomial_coefficients, solve_roughness_polynomial,
    Complex, PolyRoots,
    REAL_ROOT_TOLERANCE, ROUGHNESS_DEGREE,
};

/// Euler-Mascheroni constant.
pub const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MathConstants {
    pub euler_mascheroni: f64,
    pub pi: f64,
}

impl MathConstants {
    pub const STANDARD: MathConstants = MathConstants {
        euler_mascheroni: EULER_MASCHERONI,
        pi: std::f64::consts::PI,
    };
}

impl Default for MathConstants {
    fn default() -> Self {
        Self::STANDARD
    }
}
