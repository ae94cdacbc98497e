//! Roughness and scale estimation for the G0 family of SAR speckle models.
//!
//! The crate estimates the roughness `alpha` and scale `gamma` of the
//! intensity (G0_I) and amplitude (G0_A) models by the method of
//! log-cumulants. Besides the classical iterative trigamma inversion it
//! provides a constant-time inversion based on a seven-degree polynomial
//! solved through its companion matrix, and a posterior-mean correction of
//! the second log-cumulant statistic that keeps it strictly positive.
//!
//! Modules:
//! - [`specfun`]: gamma-family functions, trigamma inversion, incomplete beta
//!   and F quantiles, polynomial roots.
//! - [`model`]: densities, moments, log-cumulants and the seeded sampler.
//! - [`estimators`]: the four roughness estimators and the scale estimator.
//! - [`harness`]: Monte Carlo campaigns and reports.
//! - [`raster`]: raster I/O and sliding-window roughness maps.

pub mod cli;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod model;
pub mod raster;
pub mod specfun;

pub use error::{Error, Result};
pub use estimators::{
    bayes_correct_eta, estimate_alpha, estimate_alpha_with, estimate_from_log_cumulants,
    estimate_gamma, eta_hat, eta_sigma, EstimateResult, EstimateStatus, EstimatorKind,
    EstimatorOptions, EtaEstimate, FailureReason,
};
pub use model::{G0Params, LogCumulants, ModelKind, Sample};
