//! Roughness and scale estimators.
//!
//! Every roughness estimator starts from `eta = c_alpha k2 - psi1(L)`, the
//! value that `psi1(-alpha)` must match:
//!
//! - [`EstimatorKind::Traditional`] inverts the trigamma function by
//!   bracketed bisection.
//! - [`EstimatorKind::FmolcSimple`] uses `psi1(x) ~ 1/x^2`, giving
//!   `alpha = -1 / sqrt(|eta|)`.
//! - [`EstimatorKind::FastPoly`] solves the seven-degree roughness
//!   polynomial through its companion matrix.
//! - [`EstimatorKind::FastPolyCorrected`] replaces `eta` with its posterior
//!   mean under a flat positive prior before solving the polynomial.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LogCumulants, LogMoments, ModelKind, Sample};
use crate::specfun::{
    digamma_unchecked, positive_truncated_mean, solve_roughness_polynomial,
    trigamma_inverse_bracketed, trigamma_unchecked, INVERSE_BRACKET_HI,
};

/// Default lower bound of admissible roughness estimates.
pub const DEFAULT_ALPHA_FLOOR: f64 = -15.0;

/// Floor applied to the corrected statistic when its standard deviation is zero.
pub const DEGENERATE_ETA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EstimatorKind {
    #[serde(rename = "traditional")]
    Traditional,
    #[serde(rename = "fmolc")]
    FmolcSimple,
    #[serde(rename = "poly")]
    FastPoly,
    #[serde(rename = "poly-corrected")]
    FastPolyCorrected,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] = [
        EstimatorKind::Traditional,
        EstimatorKind::FmolcSimple,
        EstimatorKind::FastPoly,
        EstimatorKind::FastPolyCorrected,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Traditional => "traditional",
            EstimatorKind::FmolcSimple => "fmolc",
            EstimatorKind::FastPoly => "poly",
            EstimatorKind::FastPolyCorrected => "poly-corrected",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    /// Accepts the short names and the type names, ignoring case, `-` and `_`.
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| !matches!(c, '-' | '_')).collect::<String>().to_ascii_lowercase();
        match key.as_str() {
            "traditional" => Ok(EstimatorKind::Traditional),
            "fmolc" | "fmolcsimple" => Ok(EstimatorKind::FmolcSimple),
            "poly" | "fastpoly" => Ok(EstimatorKind::FastPoly),
            "polycorrected" | "fastpolycorrected" => Ok(EstimatorKind::FastPolyCorrected),
            _ => Err(Error::domain(format!(
                "unknown estimator '{s}' (expected traditional, fmolc, poly or poly-corrected)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FailureReason {
    NegativeEta,
    NoRealRootOrMultiple,
    RootOutOfRange,
    SolverNoConvergence,
    DegenerateK2,
}

impl FailureReason {
    pub const ALL: [FailureReason; 5] = [
        FailureReason::NegativeEta,
        FailureReason::NoRealRootOrMultiple,
        FailureReason::RootOutOfRange,
        FailureReason::SolverNoConvergence,
        FailureReason::DegenerateK2,
    ];

    /// snake_case label used in report column names.
    pub fn label(self) -> &'static str {
        match self {
            FailureReason::NegativeEta => "negative_eta",
            FailureReason::NoRealRootOrMultiple => "no_real_root_or_multiple",
            FailureReason::RootOutOfRange => "root_out_of_range",
            FailureReason::SolverNoConvergence => "solver_no_convergence",
            FailureReason::DegenerateK2 => "degenerate_k2",
        }
    }
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimateStatus {
    Ok,
    Failed,
}

/// Tunables shared by all estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorOptions {
    /// Estimates below this value count as failures.
    pub alpha_floor: f64,
    /// Residual tolerance of the bracketed trigamma inversion.
    pub tolerance: f64,
    /// Iteration cap of the bracketed trigamma inversion.
    pub max_iter: usize,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            alpha_floor: DEFAULT_ALPHA_FLOOR,
            tolerance: 1e-12,
            max_iter: 200,
        }
    }
}

/// `eta = c_alpha k2 - psi1(L)`, its standard deviation and the corrected value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaEstimate {
    pub eta_hat: f64,
    pub sigma: Option<f64>,
    pub eta_m: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub alpha_hat: Option<f64>,
    pub gamma_hat: Option<f64>,
    pub status: EstimateStatus,
    pub failure: Option<FailureReason>,
    #[serde(rename = "elapsed_ns", with = "duration_ns")]
    pub elapsed: Duration,
    pub k1: f64,
    pub k2: f64,
    pub eta_hat: Option<f64>,
    pub eta_m: Option<f64>,
}

impl EstimateResult {
    pub fn is_ok(&self) -> bool {
        self.status == EstimateStatus::Ok
    }
}

mod duration_ns {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_nanos().min(u64::MAX as u128) as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        u64::deserialize(d).map(Duration::from_nanos)
    }
}

fn check_looks(looks: f64) -> Result<()> {
    if looks.is_finite() && looks >= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("looks must be >= 1, got {looks}")))
    }
}

/// `eta = c_alpha k2 - psi1(L)`; may take any sign.
pub fn eta_hat(lc: &LogCumulants, looks: f64, model: ModelKind) -> Result<EtaEstimate> {
    check_looks(looks)?;
    Ok(EtaEstimate {
        eta_hat: model.c_alpha() * lc.k2 - trigamma_unchecked(looks),
        sigma: None,
        eta_m: None,
    })
}

/// Standard deviation of `eta` from sample central moments of `W = ln Z`:
/// `Var = c_alpha^2 / n * (mu4 - (n - 3) / (n - 1) * mu2^2)`.
fn sigma_from_moments(moments: &LogMoments, model: ModelKind) -> f64 {
    if moments.n < 2 {
        return 0.0;
    }
    let n = moments.n as f64;
    let c = model.c_alpha();
    let var = c * c / n * (moments.m4 - (n - 3.0) / (n - 1.0) * moments.m2 * moments.m2);
    var.max(0.0).sqrt()
}

/// Estimated standard deviation of `eta` for a sample of at least 4 values.
pub fn eta_sigma(sample: &Sample, model: ModelKind) -> Result<f64> {
    const MIN_SIZE: usize = 4;
    if sample.len() < MIN_SIZE {
        return Err(Error::SampleTooSmall(sample.len(), MIN_SIZE));
    }
    Ok(sigma_from_moments(&LogMoments::from_values(sample.values()), model))
}

/// Posterior mean of `eta` under a flat prior on `(0, inf)`:
/// `eta_m = eta + sigma * phi(eta / sigma) / Phi(eta / sigma)`.
///
/// With `sigma = 0` the posterior is degenerate and `eta_m = max(eta, 1e-12)`.
pub fn bayes_correct_eta(eta: EtaEstimate) -> Result<EtaEstimate> {
    let sigma = match eta.sigma {
        Some(s) if s >= 0.0 && s.is_finite() => s,
        other => {
            return Err(Error::domain(format!(
                "correction needs a finite sigma >= 0, got {other:?}"
            )))
        }
    };
    let eta_m = if sigma == 0.0 {
        eta.eta_hat.max(DEGENERATE_ETA_FLOOR)
    } else {
        positive_truncated_mean(eta.eta_hat, sigma)
    };
    Ok(EtaEstimate {
        eta_m: Some(eta_m),
        ..eta
    })
}

/// `gamma = L exp(sqrt(c_alpha) k1 - psi(L) + psi(-alpha))`.
pub fn estimate_gamma(alpha_hat: f64, k1: f64, looks: f64, model: ModelKind) -> Result<f64> {
    if !(alpha_hat.is_finite() && alpha_hat < 0.0) {
        return Err(Error::domain(format!(
            "scale estimate needs alpha < 0, got {alpha_hat}"
        )));
    }
    check_looks(looks)?;
    Ok(looks
        * (model.k1_scale() * k1 - digamma_unchecked(looks) + digamma_unchecked(-alpha_hat)).exp())
}

/// Estimates roughness (and scale on success) from a sample with default options.
pub fn estimate_alpha(
    sample: &Sample,
    looks: f64,
    model: ModelKind,
    kind: EstimatorKind,
) -> Result<EstimateResult> {
    estimate_alpha_with(sample, looks, model, kind, &EstimatorOptions::default())
}

/// Estimates roughness from a sample. Estimation failures are reported in
/// the result; only invalid arguments produce an `Err`.
pub fn estimate_alpha_with(
    sample: &Sample,
    looks: f64,
    model: ModelKind,
    kind: EstimatorKind,
    options: &EstimatorOptions,
) -> Result<EstimateResult> {
    check_looks(looks)?;
    let start = Instant::now();
    let moments = LogMoments::from_values(sample.values());
    let sigma = match kind {
        EstimatorKind::FastPolyCorrected => Some(sigma_from_moments(&moments, model)),
        _ => None,
    };
    let mut result = estimate_core(&moments.cumulants(), sigma, looks, model, kind, options);
    result.elapsed = start.elapsed();
    Ok(result)
}

/// Estimates roughness from given log-cumulants. `sigma` is used only by
/// [`EstimatorKind::FastPolyCorrected`], where `None` means zero.
pub fn estimate_from_log_cumulants(
    lc: &LogCumulants,
    sigma: Option<f64>,
    looks: f64,
    model: ModelKind,
    kind: EstimatorKind,
    options: &EstimatorOptions,
) -> Result<EstimateResult> {
    check_looks(looks)?;
    if let Some(s) = sigma {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::domain(format!("sigma must be finite and >= 0, got {s}")));
        }
    }
    let start = Instant::now();
    let mut result = estimate_core(lc, sigma, looks, model, kind, options);
    result.elapsed = start.elapsed();
    Ok(result)
}

fn estimate_core(
    lc: &LogCumulants,
    sigma: Option<f64>,
    looks: f64,
    model: ModelKind,
    kind: EstimatorKind,
    options: &EstimatorOptions,
) -> EstimateResult {
    let eta = model.c_alpha() * lc.k2 - trigamma_unchecked(looks);
    let mut result = EstimateResult {
        alpha_hat: None,
        gamma_hat: None,
        status: EstimateStatus::Failed,
        failure: None,
        elapsed: Duration::ZERO,
        k1: lc.k1,
        k2: lc.k2,
        eta_hat: Some(eta),
        eta_m: None,
    };

    let raw = match kind {
        EstimatorKind::Traditional => invert_traditional(eta, options),
        EstimatorKind::FmolcSimple => {
            if eta == 0.0 {
                Err(FailureReason::DegenerateK2)
            } else {
                Ok(-(1.0 / eta.abs()).sqrt())
            }
        }
        EstimatorKind::FastPoly => invert_polynomial(eta),
        EstimatorKind::FastPolyCorrected => {
            let corrected = EtaEstimate {
                eta_hat: eta,
                sigma: Some(sigma.unwrap_or(0.0)),
                eta_m: None,
            };
            // sigma was validated by the callers
            let eta_m = bayes_correct_eta(corrected)
                .ok()
                .and_then(|e| e.eta_m)
                .unwrap_or(DEGENERATE_ETA_FLOOR);
            result.eta_m = Some(eta_m);
            invert_polynomial(eta_m)
        }
    };

    let checked = raw.and_then(|alpha| {
        if alpha.is_finite() && alpha >= options.alpha_floor && alpha < 0.0 {
            Ok(alpha)
        } else {
            Err(FailureReason::RootOutOfRange)
        }
    });

    match checked {
        Ok(alpha) => match estimate_gamma(alpha, lc.k1, looks, model) {
            Ok(gamma) => {
                result.alpha_hat = Some(alpha);
                result.gamma_hat = Some(gamma);
                result.status = EstimateStatus::Ok;
            }
            Err(_) => result.failure = Some(FailureReason::RootOutOfRange),
        },
        Err(reason) => result.failure = Some(reason),
    }
    result
}

fn invert_traditional(eta: f64, options: &EstimatorOptions) -> std::result::Result<f64, FailureReason> {
    if !(eta > 0.0) {
        return Err(FailureReason::NegativeEta);
    }
    match trigamma_inverse_bracketed(eta, options.tolerance, options.max_iter) {
        Ok(x) => Ok(-x),
        // below psi1(1e6) the root lies beyond any admissible floor
        Err(Error::NoBracket(_)) if eta < trigamma_unchecked(INVERSE_BRACKET_HI) => {
            Err(FailureReason::RootOutOfRange)
        }
        Err(_) => Err(FailureReason::SolverNoConvergence),
    }
}

/// The unique real negative root of the roughness polynomial.
///
/// For `eta <= 0` the polynomial has no negative real root: with
/// `x = -alpha > 0` it equals `210 |eta| x^7 + 210 x^6 + 105 x^5 + 35 x^4
/// - 7 x^2 + 5`, and `35 x^4 - 7 x^2 + 5 > 0` for every real `x`.
fn invert_polynomial(eta: f64) -> std::result::Result<f64, FailureReason> {
    if !(eta > 0.0) {
        return Err(FailureReason::NoRealRootOrMultiple);
    }
    let roots = solve_roughness_polynomial(eta).map_err(|_| FailureReason::NoRealRootOrMultiple)?;
    let mut negative = roots.real_roots().filter(|&r| r < 0.0);
    match (negative.next(), negative.next()) {
        (Some(root), None) => Ok(root),
        _ => Err(FailureReason::NoRealRootOrMultiple),
    }
}
