//! Seeded Monte Carlo campaigns over (model, alpha, L, n) and their reports.
//!
//! Every (model, alpha, L, n) combination is a sample cell. Each trial of a
//! sample cell draws one sample from a seed derived from the campaign seed,
//! the cell index and the trial index, and runs every requested estimator on
//! that same sample. Results are aggregated per (model, estimator, alpha, L,
//! n) report cell in trial order, so reports do not depend on the number of
//! worker threads.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    estimate_alpha_with, EstimatorKind, EstimatorOptions, FailureReason, DEFAULT_ALPHA_FLOOR,
};
use crate::model::{csv_error, unit_mean_gamma, G0Params, G0Sampler, ModelKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MCConfig {
    pub alphas: Vec<f64>,
    pub looks: Vec<f64>,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub models: Vec<ModelKind>,
    pub estimators: Vec<EstimatorKind>,
    pub seed: u64,
    pub alpha_floor: f64,
    /// When false, `mean_time_ns` is reported as 0 so reports are byte-identical across runs.
    pub record_timing: bool,
}

impl Default for MCConfig {
    fn default() -> Self {
        Self {
            alphas: vec![-1.5, -3.0, -5.0],
            looks: vec![1.0, 3.0, 8.0],
            sizes: vec![9, 25, 49, 121, 1000],
            trials: 1000,
            models: ModelKind::ALL.to_vec(),
            estimators: EstimatorKind::ALL.to_vec(),
            seed: 1,
            alpha_floor: DEFAULT_ALPHA_FLOOR,
            record_timing: true,
        }
    }
}

impl MCConfig {
    pub fn validate(&self) -> Result<()> {
        let nonempty = [
            ("alphas", self.alphas.is_empty()),
            ("looks", self.looks.is_empty()),
            ("sizes", self.sizes.is_empty()),
            ("models", self.models.is_empty()),
            ("estimators", self.estimators.is_empty()),
        ];
        if let Some((name, _)) = nonempty.iter().find(|(_, empty)| *empty) {
            return Err(Error::Config(format!("'{name}' must not be empty")));
        }
        if self.trials == 0 {
            return Err(Error::Config("'trials' must be >= 1".into()));
        }
        for &a in &self.alphas {
            unit_mean_gamma(a).map_err(|_| Error::Config(format!("alpha {a} must be < -1")))?;
        }
        if let Some(l) = self.looks.iter().find(|l| !(l.is_finite() && **l >= 1.0)) {
            return Err(Error::Config(format!("looks {l} must be >= 1")));
        }
        if self.sizes.contains(&0) {
            return Err(Error::Config("sample sizes must be >= 1".into()));
        }
        if !(self.alpha_floor.is_finite() && self.alpha_floor < 0.0) {
            return Err(Error::Config(format!(
                "alpha_floor must be negative, got {}",
                self.alpha_floor
            )));
        }
        Ok(())
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: MCConfig =
            serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sample cells in campaign order: model, alpha, looks, size.
    pub fn sample_cells(&self) -> Vec<SampleCell> {
        let mut cells = Vec::new();
        for &model in &self.models {
            for &alpha in &self.alphas {
                for &looks in &self.looks {
                    for &n in &self.sizes {
                        cells.push(SampleCell { model, alpha, looks, n });
                    }
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleCell {
    pub model: ModelKind,
    pub alpha: f64,
    pub looks: f64,
    pub n: usize,
}

impl SampleCell {
    pub fn params(&self) -> Result<G0Params> {
        G0Params::unit_mean(self.alpha, self.looks)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of one trial, a hash of the campaign seed, sample-cell index and trial index.
pub fn trial_seed(seed: u64, cell: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ cell as u64) ^ trial as u64)
}

/// Aggregated results of one (model, estimator, alpha, L, n) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub model: ModelKind,
    pub estimator: EstimatorKind,
    pub alpha: f64,
    pub looks: f64,
    pub n: usize,
    pub trials: u64,
    pub successes: u64,
    pub failures: BTreeMap<FailureReason, u64>,
    /// Mean squared error over successful trials; absent when all failed.
    pub mse: Option<f64>,
    pub mean_time_ns: u64,
}

impl CellRecord {
    pub fn total_failures(&self) -> u64 {
        self.failures.values().sum()
    }

    pub fn failure_rate(&self) -> f64 {
        self.total_failures() as f64 / self.trials as f64
    }
}

/// Failure rate of one (model, estimator, L), pooled over alpha and n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooksMarginal {
    pub model: ModelKind,
    pub estimator: EstimatorKind,
    pub looks: f64,
    pub trials: u64,
    pub failures: u64,
    pub failure_rate: f64,
}

/// Mean estimation time of one (model, estimator, n), pooled over alpha and L.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeMarginal {
    pub model: ModelKind,
    pub estimator: EstimatorKind,
    pub n: usize,
    pub trials: u64,
    pub mean_time_ns: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MCReport {
    pub cells: Vec<CellRecord>,
    pub failure_rate_by_looks: Vec<LooksMarginal>,
    pub time_by_size: Vec<SizeMarginal>,
}

impl MCReport {
    /// Builds a report from cells, deriving the marginal tables.
    pub fn from_cells(cells: Vec<CellRecord>) -> Self {
        let mut by_looks: Vec<LooksMarginal> = Vec::new();
        let mut by_size: Vec<(SizeMarginal, u128)> = Vec::new();
        for c in &cells {
            match by_looks.iter_mut().find(|m| {
                m.model == c.model && m.estimator == c.estimator && m.looks == c.looks
            }) {
                Some(m) => {
                    m.trials += c.trials;
                    m.failures += c.total_failures();
                }
                None => by_looks.push(LooksMarginal {
                    model: c.model,
                    estimator: c.estimator,
                    looks: c.looks,
                    trials: c.trials,
                    failures: c.total_failures(),
                    failure_rate: 0.0,
                }),
            }
            let total = c.mean_time_ns as u128 * c.trials as u128;
            match by_size
                .iter_mut()
                .find(|(m, _)| m.model == c.model && m.estimator == c.estimator && m.n == c.n)
            {
                Some((m, sum)) => {
                    m.trials += c.trials;
                    *sum += total;
                }
                None => by_size.push((
                    SizeMarginal {
                        model: c.model,
                        estimator: c.estimator,
                        n: c.n,
                        trials: c.trials,
                        mean_time_ns: 0,
                    },
                    total,
                )),
            }
        }
        for m in &mut by_looks {
            m.failure_rate = m.failures as f64 / m.trials as f64;
        }
        let time_by_size = by_size
            .into_iter()
            .map(|(mut m, sum)| {
                m.mean_time_ns = (sum / m.trials.max(1) as u128) as u64;
                m
            })
            .collect();
        Self {
            cells,
            failure_rate_by_looks: by_looks,
            time_by_size,
        }
    }

    pub fn cell(
        &self,
        model: ModelKind,
        estimator: EstimatorKind,
        alpha: f64,
        looks: f64,
        n: usize,
    ) -> Option<&CellRecord> {
        self.cells.iter().find(|c| {
            c.model == model && c.estimator == estimator && c.alpha == alpha && c.looks == looks && c.n == n
        })
    }

    pub fn looks_marginal(
        &self,
        model: ModelKind,
        estimator: EstimatorKind,
        looks: f64,
    ) -> Option<&LooksMarginal> {
        self.failure_rate_by_looks
            .iter()
            .find(|m| m.model == model && m.estimator == estimator && m.looks == looks)
    }
}

/// Mean squared error of `(estimate, truth)` pairs.
pub fn mse(estimates: &[(f64, f64)]) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::EmptyInput("no successful estimates"));
    }
    let sum: f64 = estimates.iter().map(|(est, truth)| (est - truth) * (est - truth)).sum();
    Ok(sum / estimates.len() as f64)
}

#[derive(Debug, Clone, Copy)]
struct TrialOutcome {
    alpha_hat: Option<f64>,
    failure: Option<FailureReason>,
    elapsed_ns: u64,
}

pub(crate) fn thread_pool(parallelism: usize) -> Result<rayon::ThreadPool> {
    if parallelism == 0 {
        return Err(Error::Config("parallelism must be >= 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Runs a full campaign on `parallelism` worker threads.
pub fn run_campaign(cfg: &MCConfig, parallelism: usize) -> Result<MCReport> {
    cfg.validate()?;
    let pool = thread_pool(parallelism)?;
    let cells = cfg.sample_cells();
    let samplers = cells
        .iter()
        .map(|c| G0Sampler::new(&c.params()?, c.model))
        .collect::<Result<Vec<_>>>()?;
    let options = EstimatorOptions {
        alpha_floor: cfg.alpha_floor,
        ..Default::default()
    };
    let n_est = cfg.estimators.len();

    // outcomes[(cell * trials + trial) * n_est + estimator]
    let outcomes: Vec<Vec<TrialOutcome>> = pool.install(|| {
        (0..cells.len() * cfg.trials)
            .into_par_iter()
            .map(|item| {
                let (ci, trial) = (item / cfg.trials, item % cfg.trials);
                let cell = &cells[ci];
                let mut rng = crate::model::seeded_rng(trial_seed(cfg.seed, ci, trial));
                let sample = samplers[ci].sample_with(cell.n, &mut rng)?;
                cfg.estimators
                    .iter()
                    .map(|&kind| {
                        let r = estimate_alpha_with(&sample, cell.looks, cell.model, kind, &options)?;
                        Ok(TrialOutcome {
                            alpha_hat: r.alpha_hat,
                            failure: r.failure,
                            elapsed_ns: r.elapsed.as_nanos() as u64,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut records = Vec::with_capacity(cells.len() * n_est);
    for &model in &cfg.models {
        for (ei, &estimator) in cfg.estimators.iter().enumerate() {
            for (ci, cell) in cells.iter().enumerate().filter(|(_, c)| c.model == model) {
                let mut pairs = Vec::with_capacity(cfg.trials);
                let mut failures: BTreeMap<FailureReason, u64> =
                    FailureReason::ALL.iter().map(|&r| (r, 0)).collect();
                let mut total_ns: u128 = 0;
                for trial in 0..cfg.trials {
                    let o = outcomes[ci * cfg.trials + trial][ei];
                    total_ns += o.elapsed_ns as u128;
                    match (o.alpha_hat, o.failure) {
                        (Some(a), _) => pairs.push((a, cell.alpha)),
                        (None, Some(reason)) => *failures.entry(reason).or_default() += 1,
                        (None, None) => unreachable!("failed estimate without a reason"),
                    }
                }
                records.push(CellRecord {
                    model,
                    estimator,
                    alpha: cell.alpha,
                    looks: cell.looks,
                    n: cell.n,
                    trials: cfg.trials as u64,
                    successes: pairs.len() as u64,
                    failures,
                    mse: mse(&pairs).ok(),
                    mean_time_ns: if cfg.record_timing {
                        (total_ns / cfg.trials as u128) as u64
                    } else {
                        0
                    },
                });
            }
        }
    }
    Ok(MCReport::from_cells(records))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::domain(format!("unknown report format '{s}'"))),
        }
    }
}

/// Column names of the CSV report, in order.
pub fn csv_header() -> Vec<String> {
    let mut header: Vec<String> = ["model", "estimator", "alpha", "L", "n", "trials", "successes"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(FailureReason::ALL.iter().map(|r| format!("fail_{}", r.label())));
    header.push("mse".into());
    header.push("mean_time_ns".into());
    header
}

pub fn write_report(report: &MCReport, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    let path = path.as_ref();
    match format {
        ReportFormat::Json => {
            let file = File::create(path).map_err(|e| Error::io(path, e))?;
            let mut out = BufWriter::new(file);
            serde_json::to_writer_pretty(&mut out, report)
                .map_err(|e| Error::format(path, e.to_string()))?;
            out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
            out.flush().map_err(|e| Error::io(path, e))
        }
        ReportFormat::Csv => {
            let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
            writer.write_record(csv_header()).map_err(|e| csv_error(path, e))?;
            for c in &report.cells {
                let mut row = vec![
                    c.model.to_string(),
                    c.estimator.to_string(),
                    format!("{:?}", c.alpha),
                    format!("{:?}", c.looks),
                    c.n.to_string(),
                    c.trials.to_string(),
                    c.successes.to_string(),
                ];
                row.extend(
                    FailureReason::ALL
                        .iter()
                        .map(|r| c.failures.get(r).copied().unwrap_or(0).to_string()),
                );
                row.push(c.mse.map(|m| format!("{m:?}")).unwrap_or_default());
                row.push(c.mean_time_ns.to_string());
                writer.write_record(&row).map_err(|e| csv_error(path, e))?;
            }
            writer.flush().map_err(|e| Error::io(path, e))
        }
    }
}

pub fn read_report(path: impl AsRef<Path>, format: ReportFormat) -> Result<MCReport> {
    let path = path.as_ref();
    match format {
        ReportFormat::Json => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
        }
        ReportFormat::Csv => {
            let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
            let header: Vec<String> = reader
                .headers()
                .map_err(|e| csv_error(path, e))?
                .iter()
                .map(str::to_string)
                .collect();
            if header != csv_header() {
                return Err(Error::format(path, "unexpected report header"));
            }
            let mut cells = Vec::new();
            for (i, record) in reader.records().enumerate() {
                let record = record.map_err(|e| csv_error(path, e))?;
                let bad = |what: &str| Error::format(path, format!("row {}: bad {what}", i + 1));
                let num = |idx: usize, what: &str| -> Result<f64> {
                    record[idx].parse::<f64>().map_err(|_| bad(what))
                };
                let int = |idx: usize, what: &str| -> Result<u64> {
                    record[idx].parse::<u64>().map_err(|_| bad(what))
                };
                let mut failures = BTreeMap::new();
                for (k, reason) in FailureReason::ALL.iter().enumerate() {
                    failures.insert(*reason, int(7 + k, reason.label())?);
                }
                let mse_idx = 7 + FailureReason::ALL.len();
                cells.push(CellRecord {
                    model: record[0].parse().map_err(|_| bad("model"))?,
                    estimator: record[1].parse().map_err(|_| bad("estimator"))?,
                    alpha: num(2, "alpha")?,
                    looks: num(3, "L")?,
                    n: int(4, "n")? as usize,
                    trials: int(5, "trials")?,
                    successes: int(6, "successes")?,
                    failures,
                    mse: if record[mse_idx].is_empty() {
                        None
                    } else {
                        Some(num(mse_idx, "mse")?)
                    },
                    mean_time_ns: int(mse_idx + 1, "mean_time_ns")?,
                });
            }
            Ok(MCReport::from_cells(cells))
        }
    }
}
