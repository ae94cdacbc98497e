use g0lcum::harness::{
    csv_header, mse, read_report, run_campaign, trial_seed, write_report, MCConfig, MCReport, ReportFormat,
};
use g0lcum::model::{sample_g0, unit_mean_gamma};
use g0lcum::{estimate_alpha, EstimatorKind, G0Params, ModelKind};
use proptest::prelude::*;

fn small_config() -> MCConfig {
    MCConfig {
        alphas: vec![-1.5, -4.0],
        looks: vec![1.0, 4.0],
        sizes: vec![9, 49],
        trials: 40,
        seed: 17,
        record_timing: false,
        ..Default::default()
    }
}

#[test]
fn single_trial_matches_direct_estimate() {
    let cfg = MCConfig {
        alphas: vec![-3.0],
        looks: vec![2.0],
        sizes: vec![25],
        trials: 1,
        models: vec![ModelKind::Intensity],
        estimators: vec![EstimatorKind::FastPoly],
        seed: 99,
        ..Default::default()
    };
    let report = run_campaign(&cfg, 1).unwrap();
    assert_eq!(report.cells.len(), 1);
    let cell = &report.cells[0];
    assert_eq!(cell.trials, 1);

    let p = G0Params::new(-3.0, unit_mean_gamma(-3.0).unwrap(), 2.0).unwrap();
    let sample = sample_g0(&p, ModelKind::Intensity, 25, trial_seed(99, 0, 0)).unwrap();
    let direct = estimate_alpha(&sample, 2.0, ModelKind::Intensity, EstimatorKind::FastPoly).unwrap();
    assert_eq!(cell.successes, direct.is_ok() as u64);
    match direct.alpha_hat {
        Some(a) => assert_eq!(cell.mse, Some((a + 3.0) * (a + 3.0))),
        None => {
            assert_eq!(cell.mse, None);
            assert_eq!(cell.failures[&direct.failure.unwrap()], 1);
        }
    }
}

#[test]
fn every_cell_reconciles() {
    let report = run_campaign(&small_config(), 3).unwrap();
    assert_eq!(report.cells.len(), 2 * 4 * 2 * 2 * 2);
    for c in &report.cells {
        assert_eq!(c.successes + c.total_failures(), c.trials);
        assert_eq!(c.mse.is_some(), c.successes > 0);
        assert_eq!(c.mean_time_ns, 0);
    }
    for m in &report.failure_rate_by_looks {
        assert_eq!(m.trials, 2 * 2 * 40);
    }
}

#[test]
fn reports_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config();
    let mut files = Vec::new();
    for threads in [1, 2, 5] {
        let report = run_campaign(&cfg, threads).unwrap();
        for (format, ext) in [(ReportFormat::Csv, "csv"), (ReportFormat::Json, "json")] {
            let path = dir.path().join(format!("r{threads}.{ext}"));
            write_report(&report, &path, format).unwrap();
            files.push((ext, std::fs::read(&path).unwrap()));
        }
    }
    for ext in ["csv", "json"] {
        let same: Vec<_> = files.iter().filter(|(e, _)| *e == ext).map(|(_, b)| b).collect();
        assert!(same.windows(2).all(|w| w[0] == w[1]), "{ext} differs");
    }
}

#[test]
fn estimates_ignore_thread_count_even_with_timing() {
    let cfg = MCConfig { record_timing: true, ..small_config() };
    let strip = |r: MCReport| {
        r.cells
            .into_iter()
            .map(|mut c| {
                c.mean_time_ns = 0;
                c
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(run_campaign(&cfg, 1).unwrap()), strip(run_campaign(&cfg, 4).unwrap()));
}

#[test]
fn csv_and_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_campaign(&MCConfig { record_timing: true, ..small_config() }, 2).unwrap();
    assert!(report.cells.iter().any(|c| c.mse.is_some()));
    for (format, name) in [(ReportFormat::Csv, "r.csv"), (ReportFormat::Json, "r.json")] {
        let path = dir.path().join(name);
        write_report(&report, &path, format).unwrap();
        assert_eq!(read_report(&path, format).unwrap(), report, "{name}");
    }
}

#[test]
fn all_failed_cell_has_absent_mse() {
    let cfg = MCConfig {
        alphas: vec![-3.0],
        looks: vec![1.0],
        sizes: vec![9],
        trials: 5,
        models: vec![ModelKind::Intensity],
        estimators: vec![EstimatorKind::Traditional],
        alpha_floor: -1e-9,
        record_timing: false,
        ..Default::default()
    };
    let report = run_campaign(&cfg, 1).unwrap();
    assert_eq!(report.cells[0].successes, 0);
    assert_eq!(report.cells[0].mse, None);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    write_report(&report, &path, ReportFormat::Csv).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[row.len() - 2], "");
    let json_path = dir.path().join("r.json");
    write_report(&report, &json_path, ReportFormat::Json).unwrap();
    assert!(std::fs::read_to_string(&json_path).unwrap().contains("\"mse\": null"));
}

#[test]
fn empty_report_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    write_report(&MCReport::default(), &path, ReportFormat::Csv).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert_eq!(text.trim_end(), csv_header().join(","));
    assert_eq!(read_report(&path, ReportFormat::Csv).unwrap(), MCReport::default());
}

#[test]
fn header_column_order() {
    assert_eq!(
        csv_header(),
        [
            "model",
            "estimator",
            "alpha",
            "L",
            "n",
            "trials",
            "successes",
            "fail_negative_eta",
            "fail_no_real_root_or_multiple",
            "fail_root_out_of_range",
            "fail_solver_no_convergence",
            "fail_degenerate_k2",
            "mse",
            "mean_time_ns",
        ]
    );
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(run_campaign(&MCConfig { trials: 0, ..small_config() }, 1).is_err());
    assert!(run_campaign(&small_config(), 0).is_err());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    std::fs::write(&path, r#"{"alphas": [-0.5]}"#).unwrap();
    assert!(MCConfig::from_json_file(&path).is_err());
    std::fs::write(&path, r#"{"trails": 3}"#).unwrap();
    assert!(MCConfig::from_json_file(&path).is_err());
}

proptest! {
    #[test]
    fn mse_is_permutation_invariant(mut pairs in prop::collection::vec((-15.0f64..0.0, -15.0f64..0.0), 1..40), seed in any::<u64>()) {
        let before = mse(&pairs).unwrap();
        let n = pairs.len();
        let mut state = seed;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            pairs.swap(i, j);
        }
        let after = mse(&pairs).unwrap();
        prop_assert!((before - after).abs() <= 1e-12 * before.max(1.0));
        prop_assert!(after >= 0.0);
    }
}
