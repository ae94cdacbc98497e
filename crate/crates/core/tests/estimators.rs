use g0lcum::estimators::{estimate_from_log_cumulants, FailureReason};
use g0lcum::model::{sample_g0, seeded_rng, theoretical_log_cumulants};
use g0lcum::{
    bayes_correct_eta, estimate_alpha, estimate_alpha_with, estimate_gamma, eta_sigma, EstimateStatus,
    EstimatorKind, EstimatorOptions, EtaEstimate, G0Params, ModelKind, Sample,
};
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};

#[test]
fn corrected_estimates_concentrate_near_truth() {
    let p = G0Params::new(-3.0, 2.0, 2.0).unwrap();
    let mut close = 0;
    for seed in 0..100 {
        let s = sample_g0(&p, ModelKind::Intensity, 1000, seed).unwrap();
        let r = estimate_alpha(&s, 2.0, ModelKind::Intensity, EstimatorKind::FastPolyCorrected).unwrap();
        if r.is_ok() && (r.alpha_hat.unwrap() + 3.0).abs() <= 0.5 {
            close += 1;
        }
    }
    // A separate simulation of 2000 trials puts the probability of landing
    // within 0.5 at about 0.86; allow four binomial standard deviations.
    assert!(close >= 72, "{close}/100");
}

#[test]
fn correction_reduces_failures_for_small_samples() {
    let p = G0Params::unit_mean(-1.5, 1.0).unwrap();
    let (mut plain, mut corrected) = (0, 0);
    for seed in 0..1000 {
        let s = sample_g0(&p, ModelKind::Intensity, 9, seed).unwrap();
        if !estimate_alpha(&s, 1.0, ModelKind::Intensity, EstimatorKind::FastPoly).unwrap().is_ok() {
            plain += 1;
        }
        if !estimate_alpha(&s, 1.0, ModelKind::Intensity, EstimatorKind::FastPolyCorrected).unwrap().is_ok() {
            corrected += 1;
        }
    }
    assert!(corrected < plain, "corrected {corrected} vs plain {plain}");
}

#[test]
fn traditional_and_polynomial_agree_on_exact_cumulants() {
    let opts = EstimatorOptions::default();
    let mut alpha = -2.0;
    while alpha > -15.0 + 1e-9 {
        for model in ModelKind::ALL {
            let lc = theoretical_log_cumulants(&G0Params::unit_mean(alpha, 2.0).unwrap(), model).unwrap();
            let t = estimate_from_log_cumulants(&lc, None, 2.0, model, EstimatorKind::Traditional, &opts).unwrap();
            let p = estimate_from_log_cumulants(&lc, None, 2.0, model, EstimatorKind::FastPoly, &opts).unwrap();
            let (t, p) = (t.alpha_hat.unwrap(), p.alpha_hat.unwrap());
            assert!((t - p).abs() <= 5e-3, "alpha {alpha}: {t} vs {p}");
            assert!((t - alpha).abs() <= 1e-8);
        }
        alpha -= 0.25;
    }
}

#[test]
fn exact_cumulants_recover_gamma() {
    let p = G0Params::new(-5.0, 3.7, 3.0).unwrap();
    for model in ModelKind::ALL {
        let lc = theoretical_log_cumulants(&p, model).unwrap();
        let g = estimate_gamma(-5.0, lc.k1, 3.0, model).unwrap();
        assert!((g - 3.7).abs() < 1e-12, "{model}: {g}");
    }
}

#[test]
fn sigma_of_gaussian_logs() {
    let n = 100_000;
    let mut rng = seeded_rng(31);
    let values: Vec<f64> = (0..n)
        .map(|_| {
            let w: f64 = StandardNormal.sample(&mut rng);
            w.exp()
        })
        .collect();
    let s = Sample::new(values, ModelKind::Intensity).unwrap();
    let sigma = eta_sigma(&s, ModelKind::Intensity).unwrap();
    let expected = (3.0 - (n as f64 - 3.0) / (n as f64 - 1.0)) / n as f64;
    // the variance estimate itself fluctuates by a few percent at this n
    assert!((sigma * sigma / expected - 1.0).abs() < 0.05, "{} vs {expected}", sigma * sigma);
    let sa = eta_sigma(&s, ModelKind::Amplitude).unwrap();
    assert!((sa / sigma - 4.0).abs() < 1e-12);
}

#[test]
fn bayes_correction_examples() {
    let m = |e: f64, s: f64| {
        bayes_correct_eta(EtaEstimate { eta_hat: e, sigma: Some(s), eta_m: None }).unwrap().eta_m.unwrap()
    };
    assert!((m(0.0, 1.0) - 0.797_884_560_802_865_4).abs() < 1e-15);
    assert_eq!(m(10.0, 0.1), 10.0);
    assert!(m(-0.5, 0.5) > 0.0);
    assert_eq!(m(-3.0, 0.0), 1e-12);
    assert_eq!(m(2.0, 0.0), 2.0);
    assert!(bayes_correct_eta(EtaEstimate { eta_hat: 1.0, sigma: None, eta_m: None }).is_err());
}

#[test]
fn configurable_floor_changes_classification() {
    let p = G0Params::unit_mean(-8.0, 3.0).unwrap();
    let lc = theoretical_log_cumulants(&p, ModelKind::Intensity).unwrap();
    let tight = EstimatorOptions { alpha_floor: -5.0, ..Default::default() };
    let r = estimate_from_log_cumulants(&lc, None, 3.0, ModelKind::Intensity, EstimatorKind::Traditional, &tight)
        .unwrap();
    assert_eq!(r.failure, Some(FailureReason::RootOutOfRange));
    assert!(r.alpha_hat.is_none() && r.gamma_hat.is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn corrected_eta_is_positive_and_above_estimate(e in -50.0f64..50.0, s in 1e-3f64..20.0) {
        let m = bayes_correct_eta(EtaEstimate { eta_hat: e, sigma: Some(s), eta_m: None }).unwrap().eta_m.unwrap();
        prop_assert!(m > 0.0 && m.is_finite());
        prop_assert!(m >= e);
    }

    #[test]
    fn corrected_eta_is_monotone(e in -30.0f64..30.0, d in 1e-6f64..1.0, s in 1e-2f64..5.0) {
        let m = |x: f64| bayes_correct_eta(EtaEstimate { eta_hat: x, sigma: Some(s), eta_m: None }).unwrap().eta_m.unwrap();
        prop_assert!(m(e + d) >= m(e) * (1.0 - 1e-12));
    }

    #[test]
    fn every_result_is_classified(
        alpha in -12.0f64..-1.2,
        looks in 1.0f64..9.0,
        n in 4usize..200,
        seed in any::<u64>(),
        model in prop::sample::select(ModelKind::ALL.to_vec()),
        kind in prop::sample::select(EstimatorKind::ALL.to_vec()),
    ) {
        let p = G0Params::unit_mean(alpha, looks).unwrap();
        let s = sample_g0(&p, model, n, seed).unwrap();
        let r = estimate_alpha_with(&s, looks, model, kind, &EstimatorOptions::default()).unwrap();
        match r.status {
            EstimateStatus::Ok => {
                let a = r.alpha_hat.unwrap();
                prop_assert!((-15.0..0.0).contains(&a));
                prop_assert!(r.failure.is_none());
                prop_assert!(r.gamma_hat.unwrap() > 0.0);
            }
            EstimateStatus::Failed => {
                prop_assert!(r.failure.is_some());
                prop_assert!(r.alpha_hat.is_none() && r.gamma_hat.is_none());
            }
        }
        if kind == EstimatorKind::FastPolyCorrected {
            prop_assert!(r.eta_m.unwrap() > 0.0);
        }
    }
}
