use accreg_core::spectral::{
    bias_r, ode_bias_oracle, rate_experiment, RateProblem, RateRule, SourceConditionFixture,
    SpectralModel,
};
use proptest::prelude::*;

#[test]
fn closed_form_matches_ode_oracle() {
    let mut worst = 0.0f64;
    for s in [0.0, 0.5, 1.0, 2.0] {
        for lambda in [0.25, 1.0, 4.0, 25.0] {
            for t in [0.1, 1.0, 5.0, 20.0] {
                let exact = bias_r(s, t, lambda).unwrap();
                let ode = ode_bias_oracle(s, t, lambda, 20_000).unwrap();
                worst = worst.max((exact - ode).abs());
            }
        }
    }
    assert!(worst <= 1e-6, "worst oracle gap {worst}");
}

#[test]
fn half_order_is_sinc() {
    for lambda in [0.01f64, 0.5, 1.0, 9.0, 400.0] {
        for i in 1..=200 {
            let t = i as f64 * 0.37;
            let x = lambda.sqrt() * t;
            let r = bias_r(0.5, t, lambda).unwrap();
            assert!((r - x.sin() / x).abs() <= 1e-10, "lambda={lambda} t={t}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn bias_bounded_by_one(s in 0.0f64..4.0, t in 0.0f64..200.0, lambda in 1e-4f64..100.0) {
        let r = bias_r(s, t, lambda).unwrap();
        prop_assert!(r.abs() <= 1.0 + 1e-12, "r = {r}");
    }
}

#[test]
fn continuous_energy_is_nonincreasing() {
    let model = SpectralModel::new(
        vec![1.0, 0.7, 0.3, 0.05],
        vec![1.0, -0.5, 2.0, 0.3],
        vec![0.2, 0.4, -0.1, 0.05],
        1.0,
    )
    .unwrap();
    let mut prev = model.energy(0.0).unwrap();
    for i in 1..=4000 {
        let e = model.energy(i as f64 * 0.01).unwrap();
        assert!(e <= prev + 1e-12, "energy rose at t = {}", i as f64 * 0.01);
        prev = e;
    }
}

#[test]
fn a_priori_rates_follow_theory() {
    let problem = RateProblem::log_spectrum(400, 1.0, 1e-6, 1.0, 2.0).unwrap();
    let deltas = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5];
    for mu in [0.25, 0.5] {
        let fx = SourceConditionFixture::flat(mu, 400).unwrap();
        let fit = rate_experiment(&fx, &problem, &deltas, RateRule::APriori).unwrap();
        let theory = 2.0 * mu / (2.0 * mu + 1.0);
        assert!(
            (fit.error_slope - theory).abs() <= 0.12,
            "mu={mu}: {}",
            fit.error_slope
        );
        assert!((fit.stop_slope + 1.0 / (2.0 * mu + 1.0)).abs() < 1e-12);
    }
}

#[test]
fn discrepancy_errors_shrink_with_noise() {
    let problem = RateProblem::log_spectrum(400, 1.0, 1e-6, 1.0, 2.0).unwrap();
    let fx = SourceConditionFixture::flat(0.25, 400).unwrap();
    let fit = rate_experiment(&fx, &problem, &[1e-2, 1e-3, 1e-4], RateRule::Discrepancy).unwrap();
    assert!(fit.error_slope > 0.0 && fit.stop_slope < 0.0, "{fit:?}");
    for w in fit.points.windows(2) {
        assert!(w[1].error < w[0].error && w[1].stop > w[0].stop);
    }
}
