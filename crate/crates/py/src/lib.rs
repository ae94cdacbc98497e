//! Python bindings for the `g0lcum` crate.
//!
//! Samples and rasters cross the boundary as plain lists of floats; models
//! and estimators are named by the same strings the command line accepts.

use g0lcum::harness::{run_campaign as run_campaign_rs, MCConfig};
use g0lcum::model::{self, G0Sampler};
use g0lcum::raster::{roughness_map as roughness_map_rs, Raster};
use g0lcum::specfun;
use g0lcum::{EstimatorKind, EstimatorOptions, EtaEstimate, ModelKind, Sample};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: g0lcum::Error) -> PyErr {
    match e {
        g0lcum::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_model(model: &str) -> PyResult<ModelKind> {
    model.parse().map_err(py_err)
}

fn parse_estimator(estimator: &str) -> PyResult<EstimatorKind> {
    estimator.parse().map_err(py_err)
}

fn params(alpha: f64, gamma: Option<f64>, looks: f64) -> PyResult<g0lcum::G0Params> {
    match gamma {
        Some(g) => g0lcum::G0Params::new(alpha, g, looks),
        None => g0lcum::G0Params::unit_mean(alpha, looks),
    }
    .map_err(py_err)
}

/// Outcome of one roughness estimate.
#[pyclass(frozen, get_all, module = "pyg0lcum")]
struct EstimateResult {
    alpha_hat: Option<f64>,
    gamma_hat: Option<f64>,
    /// "Ok" or "Failed".
    status: String,
    failure: Option<String>,
    elapsed_ns: u64,
    k1: f64,
    k2: f64,
    eta_hat: Option<f64>,
    eta_m: Option<f64>,
}

impl From<g0lcum::EstimateResult> for EstimateResult {
    fn from(r: g0lcum::EstimateResult) -> Self {
        Self {
            alpha_hat: r.alpha_hat,
            gamma_hat: r.gamma_hat,
            status: format!("{:?}", r.status),
            failure: r.failure.map(|f| format!("{f:?}")),
            elapsed_ns: r.elapsed.as_nanos() as u64,
            k1: r.k1,
            k2: r.k2,
            eta_hat: r.eta_hat,
            eta_m: r.eta_m,
        }
    }
}

#[pymethods]
impl EstimateResult {
    #[getter]
    fn ok(&self) -> bool {
        self.status == "Ok"
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        d.set_item("alpha_hat", self.alpha_hat)?;
        d.set_item("gamma_hat", self.gamma_hat)?;
        d.set_item("status", &self.status)?;
        d.set_item("failure", &self.failure)?;
        d.set_item("elapsed_ns", self.elapsed_ns)?;
        d.set_item("k1", self.k1)?;
        d.set_item("k2", self.k2)?;
        d.set_item("eta_hat", self.eta_hat)?;
        d.set_item("eta_m", self.eta_m)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        match (self.alpha_hat, &self.failure) {
            (Some(a), _) => format!("EstimateResult(alpha_hat={a}, gamma_hat={})", self.gamma_hat.unwrap_or(f64::NAN)),
            (None, Some(f)) => format!("EstimateResult(failed: {f})"),
            (None, None) => "EstimateResult(failed)".to_string(),
        }
    }
}

/// Sliding-window roughness map. `alpha` rows hold `None` on the border and
/// where estimation failed.
#[pyclass(frozen, get_all, module = "pyg0lcum")]
struct RoughnessMap {
    width: usize,
    height: usize,
    window: usize,
    alpha: Vec<Vec<Option<f64>>>,
    gamma: Vec<Vec<Option<f64>>>,
    n_failures: usize,
    elapsed_ns: u64,
}

#[pyfunction]
fn ln_gamma(x: f64) -> PyResult<f64> {
    specfun::ln_gamma(x).map_err(py_err)
}

#[pyfunction]
fn digamma(x: f64) -> PyResult<f64> {
    specfun::digamma(x).map_err(py_err)
}

#[pyfunction]
fn trigamma(x: f64) -> PyResult<f64> {
    specfun::trigamma(x).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (eta, tol = 1e-12, max_iter = 200))]
fn trigamma_inverse(eta: f64, tol: f64, max_iter: usize) -> PyResult<f64> {
    specfun::trigamma_inverse_bracketed(eta, tol, max_iter).map_err(py_err)
}

#[pyfunction]
fn reg_incomplete_beta(x: f64, a: f64, b: f64) -> PyResult<f64> {
    specfun::reg_incomplete_beta(x, a, b).map_err(py_err)
}

#[pyfunction]
fn inv_reg_incomplete_beta(u: f64, a: f64, b: f64) -> PyResult<f64> {
    specfun::inv_reg_incomplete_beta(u, a, b).map_err(py_err)
}

#[pyfunction]
fn f_cdf(x: f64, d1: f64, d2: f64) -> PyResult<f64> {
    specfun::f_cdf(x, d1, d2).map_err(py_err)
}

#[pyfunction]
fn f_quantile(u: f64, d1: f64, d2: f64) -> PyResult<f64> {
    specfun::f_quantile(u, d1, d2).map_err(py_err)
}

#[pyfunction]
fn std_normal_cdf(t: f64) -> f64 {
    specfun::std_normal_cdf(t)
}

/// All seven roots of the roughness polynomial as `(re, im)` pairs.
#[pyfunction]
fn solve_roughness_polynomial(eta_m: f64) -> PyResult<Vec<(f64, f64)>> {
    let roots = specfun::solve_roughness_polynomial(eta_m).map_err(py_err)?;
    Ok(roots.roots.iter().map(|z| (z.re, z.im)).collect())
}

#[pyfunction]
fn unit_mean_gamma(alpha: f64) -> PyResult<f64> {
    model::unit_mean_gamma(alpha).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (z, alpha, looks, model, gamma = None))]
fn pdf(z: f64, alpha: f64, looks: f64, model: &str, gamma: Option<f64>) -> PyResult<f64> {
    model::pdf(&params(alpha, gamma, looks)?, z, parse_model(model)?).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (z, alpha, looks, model, gamma = None))]
fn cdf(z: f64, alpha: f64, looks: f64, model: &str, gamma: Option<f64>) -> PyResult<f64> {
    model::cdf(&params(alpha, gamma, looks)?, z, parse_model(model)?).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (r, alpha, looks, model, gamma = None))]
fn moment(r: f64, alpha: f64, looks: f64, model: &str, gamma: Option<f64>) -> PyResult<f64> {
    model::moment(&params(alpha, gamma, looks)?, r, parse_model(model)?).map_err(py_err)
}

/// Theoretical `(k1, k2)`.
#[pyfunction]
#[pyo3(signature = (alpha, looks, model, gamma = None))]
fn log_cumulants(alpha: f64, looks: f64, model: &str, gamma: Option<f64>) -> PyResult<(f64, f64)> {
    let lc = model::theoretical_log_cumulants(&params(alpha, gamma, looks)?, parse_model(model)?).map_err(py_err)?;
    Ok((lc.k1, lc.k2))
}

/// Sample `(k1, k2)` of positive values.
#[pyfunction]
fn sample_log_cumulants(values: Vec<f64>) -> PyResult<(f64, f64)> {
    let lc = model::log_cumulants_of(&values).map_err(py_err)?;
    Ok((lc.k1, lc.k2))
}

/// Seeded G0 draws. `gamma` defaults to the unit-mean scale.
#[pyfunction]
#[pyo3(signature = (alpha, looks, model, n, seed, gamma = None))]
fn sample_g0(alpha: f64, looks: f64, model: &str, n: usize, seed: u64, gamma: Option<f64>) -> PyResult<Vec<f64>> {
    let p = params(alpha, gamma, looks)?;
    Ok(model::sample_g0(&p, parse_model(model)?, n, seed).map_err(py_err)?.into_values())
}

/// Sampler value at a given uniform quantile `u` in `[0, 1)`.
#[pyfunction]
#[pyo3(signature = (u, alpha, looks, model, gamma = None))]
fn sample_at(u: f64, alpha: f64, looks: f64, model: &str, gamma: Option<f64>) -> PyResult<f64> {
    let s = G0Sampler::new(&params(alpha, gamma, looks)?, parse_model(model)?).map_err(py_err)?;
    s.value_at(u).map_err(py_err)
}

#[pyfunction]
fn eta_hat(k1: f64, k2: f64, looks: f64, model: &str) -> PyResult<f64> {
    let lc = g0lcum::LogCumulants { k1, k2, n: None };
    Ok(g0lcum::eta_hat(&lc, looks, parse_model(model)?).map_err(py_err)?.eta_hat)
}

#[pyfunction]
fn eta_sigma(values: Vec<f64>, model: &str) -> PyResult<f64> {
    let m = parse_model(model)?;
    let s = Sample::new(values, m).map_err(py_err)?;
    g0lcum::eta_sigma(&s, m).map_err(py_err)
}

/// Posterior mean of eta under a flat prior on the positive half-line.
#[pyfunction]
fn bayes_correct_eta(eta_hat: f64, sigma: f64) -> PyResult<f64> {
    let e = g0lcum::bayes_correct_eta(EtaEstimate { eta_hat, sigma: Some(sigma), eta_m: None }).map_err(py_err)?;
    Ok(e.eta_m.unwrap_or(e.eta_hat))
}

#[pyfunction]
#[pyo3(signature = (values, looks, model, estimator = "poly-corrected", alpha_floor = -15.0))]
fn estimate_alpha(values: Vec<f64>, looks: f64, model: &str, estimator: &str, alpha_floor: f64) -> PyResult<EstimateResult> {
    let m = parse_model(model)?;
    let s = Sample::new(values, m).map_err(py_err)?;
    let opts = EstimatorOptions { alpha_floor, ..Default::default() };
    let r = g0lcum::estimate_alpha_with(&s, looks, m, parse_estimator(estimator)?, &opts).map_err(py_err)?;
    Ok(r.into())
}

#[pyfunction]
fn estimate_gamma(alpha_hat: f64, k1: f64, looks: f64, model: &str) -> PyResult<f64> {
    g0lcum::estimate_gamma(alpha_hat, k1, looks, parse_model(model)?).map_err(py_err)
}

/// Roughness map of a raster given as rows of pixel values.
#[pyfunction]
#[pyo3(signature = (rows, looks, model, window, estimator = "poly-corrected", threads = 1))]
fn roughness_map(
    py: Python<'_>,
    rows: Vec<Vec<f64>>,
    looks: f64,
    model: &str,
    window: usize,
    estimator: &str,
    threads: usize,
) -> PyResult<RoughnessMap> {
    let height = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != width) {
        return Err(PyValueError::new_err("raster rows must all have the same length"));
    }
    let raster = Raster::new(width, height, rows.concat(), parse_model(model)?, looks).map_err(py_err)?;
    let kind = parse_estimator(estimator)?;
    let map = py.detach(|| roughness_map_rs(&raster, window, kind, threads)).map_err(py_err)?;
    let split = |v: &[Option<f64>]| v.chunks(width).map(<[_]>::to_vec).collect();
    Ok(RoughnessMap {
        width,
        height,
        window,
        alpha: split(&map.alpha),
        gamma: split(&map.gamma),
        n_failures: map.n_failures,
        elapsed_ns: map.elapsed.as_nanos() as u64,
    })
}

/// Runs a Monte Carlo campaign from a JSON config string and returns the
/// report as nested dicts.
#[pyfunction]
#[pyo3(signature = (config_json = "{}", threads = 1))]
fn run_campaign<'py>(py: Python<'py>, config_json: &str, threads: usize) -> PyResult<Bound<'py, PyAny>> {
    let cfg: MCConfig = serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let report = py.detach(|| run_campaign_rs(&cfg, threads)).map_err(py_err)?;
    let text = serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pymodule]
fn pyg0lcum(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<EstimateResult>()?;
    m.add_class::<RoughnessMap>()?;
    m.add_function(wrap_pyfunction!(ln_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(digamma, m)?)?;
    m.add_function(wrap_pyfunction!(trigamma, m)?)?;
    m.add_function(wrap_pyfunction!(trigamma_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(reg_incomplete_beta, m)?)?;
    m.add_function(wrap_pyfunction!(inv_reg_incomplete_beta, m)?)?;
    m.add_function(wrap_pyfunction!(f_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(f_quantile, m)?)?;
    m.add_function(wrap_pyfunction!(std_normal_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(solve_roughness_polynomial, m)?)?;
    m.add_function(wrap_pyfunction!(unit_mean_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(pdf, m)?)?;
    m.add_function(wrap_pyfunction!(cdf, m)?)?;
    m.add_function(wrap_pyfunction!(moment, m)?)?;
    m.add_function(wrap_pyfunction!(log_cumulants, m)?)?;
    m.add_function(wrap_pyfunction!(sample_log_cumulants, m)?)?;
    m.add_function(wrap_pyfunction!(sample_g0, m)?)?;
    m.add_function(wrap_pyfunction!(sample_at, m)?)?;
    m.add_function(wrap_pyfunction!(eta_hat, m)?)?;
    m.add_function(wrap_pyfunction!(eta_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(bayes_correct_eta, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(roughness_map, m)?)?;
    m.add_function(wrap_pyfunction!(run_campaign, m)?)?;
    Ok(())
}
