//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 for invalid arguments or domain errors, 2 for
//! I/O errors. A failed estimate is still a success; its status is reported
//! in the JSON payload.

use std::ffi::OsString;
use std::io::Write;
use std::num::NonZeroUsize;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::estimators::{estimate_alpha, EstimatorKind};
use crate::harness::{run_campaign, write_report, MCConfig, ReportFormat};
use crate::model::{read_sample_csv, sample_g0, unit_mean_gamma, write_sample_csv, G0Params, ModelKind};
use crate::raster::{read_raster, roughness_map, write_map, MapFormat, RasterFormat};
use crate::specfun::oracle::run_checks;

#[derive(Debug, Parser)]
#[command(name = "g0lcum", version, about = "Roughness estimation for G0 speckle models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a seeded G0 sample and write it as CSV.
    Sample {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long)]
        looks: f64,
        #[arg(long)]
        model: ModelKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Scale; defaults to the unit-mean value -alpha - 1.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate alpha from a sample CSV and print one JSON line.
    Estimate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        looks: f64,
        #[arg(long)]
        model: ModelKind,
        #[arg(long)]
        estimator: EstimatorKind,
    },
    /// Run a Monte Carlo campaign from a JSON config.
    Mc {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: ReportFormat,
        #[arg(long)]
        threads: Option<NonZeroUsize>,
    },
    /// Compute a sliding-window roughness map of a raster.
    Map {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: RasterFormat,
        #[arg(long)]
        window: usize,
        #[arg(long)]
        looks: f64,
        #[arg(long)]
        model: ModelKind,
        #[arg(long)]
        estimator: EstimatorKind,
        /// Output path; a `.pgm` extension writes a grayscale image, anything else CSV.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<NonZeroUsize>,
    },
    /// Check the special functions against series oracles.
    SpecfunCheck,
}

fn threads(t: Option<NonZeroUsize>) -> usize {
    t.or_else(|| std::thread::available_parallelism().ok())
        .map_or(1, NonZeroUsize::get)
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Sample {
            alpha,
            looks,
            model,
            n,
            seed,
            gamma,
            out,
        } => {
            let gamma = match gamma {
                Some(g) => g,
                None => unit_mean_gamma(alpha)?,
            };
            let params = G0Params::new(alpha, gamma, looks)?;
            let sample = sample_g0(&params, model, n, seed)?;
            write_sample_csv(&sample, &out)
        }
        Command::Estimate {
            input,
            looks,
            model,
            estimator,
        } => {
            let sample = read_sample_csv(&input, model)?;
            let result = estimate_alpha(&sample, looks, model, estimator)?;
            let line = serde_json::to_string(&result).map_err(|e| Error::domain(e.to_string()))?;
            println!("{line}");
            Ok(())
        }
        Command::Mc {
            config,
            out,
            format,
            threads: t,
        } => {
            let cfg = MCConfig::from_json_file(&config)?;
            let report = run_campaign(&cfg, threads(t))?;
            write_report(&report, &out, format)
        }
        Command::Map {
            input,
            format,
            window,
            looks,
            model,
            estimator,
            out,
            threads: t,
        } => {
            let raster = read_raster(&input, format, model, looks)?;
            let map = roughness_map(&raster, window, estimator, threads(t))?;
            let out_format = match out.extension().and_then(|e| e.to_str()) {
                Some(ext) if ext.eq_ignore_ascii_case("pgm") => MapFormat::Pgm,
                _ => MapFormat::Csv,
            };
            write_map(&map, &out, out_format)?;
            eprintln!(
                "map {}x{}: {} failures in {:.3} s",
                map.width,
                map.height,
                map.n_failures,
                map.elapsed.as_secs_f64()
            );
            Ok(())
        }
        Command::SpecfunCheck => {
            let start = std::time::Instant::now();
            let report = run_checks()?;
            println!("max_rel_err_trigamma {:e}", report.max_rel_trigamma);
            println!("max_rel_err_digamma {:e}", report.max_rel_digamma);
            println!("max_abs_err_f_quantile_round_trip {:e}", report.max_abs_quantile);
            println!("elapsed_s {:.3}", start.elapsed().as_secs_f64());
            Ok(())
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => {
            let _ = std::io::stdout().flush();
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_io() {
                2
            } else {
                1
            }
        }
    }
}
