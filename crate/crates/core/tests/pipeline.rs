use pacbam::prelude::*;

fn config(p: usize, iters: usize, seed: u64) -> SamplerConfig {
    SamplerConfig::builder(p)
        .temperature(Temperature::Practical { noise_var: 0.1 })
        .iterations(iters)
        .seed(seed)
        .build()
        .unwrap()
}

#[test]
fn aggregate_risk_is_below_mean_state_risk() {
    for seed in 0..4 {
        let sim = simulate(&SimSpec::new(1 + (seed % 3) as u8, 120, 10, seed).unwrap()).unwrap();
        let res = fit(&sim.data, config(10, 200, seed)).unwrap();
        let s = &res.summary;
        assert!(s.aggregated_risk <= s.mean_post_burn_in_risk + 1e-9, "seed {seed}: {s:?}");
        assert_eq!(s.empirical_risk.len(), 201);
        assert_eq!(s.support_histogram.values().sum::<usize>(), 100);
        let attempted = s.addition.attempted + s.deletion.attempted + s.adjustment.attempted;
        assert_eq!(attempted, 200);
    }
}

#[test]
fn zero_iteration_fit_uses_the_initial_state() {
    let sim = simulate(&SimSpec::new(1, 50, 6, 0).unwrap()).unwrap();
    let cfg = SamplerConfig::builder(6)
        .temperature(Temperature::Practical { noise_var: 0.1 })
        .iterations(0)
        .burn_in(0)
        .build()
        .unwrap();
    let res = fit(&sim.data, cfg).unwrap();
    assert_eq!(res.aggregated, res.randomized);
    assert_eq!(res.summary.empirical_risk.len(), 1);
}

#[test]
fn fit_predicts_better_than_zero() {
    let sim = simulate(&SimSpec::new(1, 200, 20, 5).unwrap()).unwrap();
    let res = fit(&sim.data, config(20, 600, 1)).unwrap();
    let zero = sim.truth.iter().map(|t| t * t).sum::<f64>() / sim.truth.len() as f64;
    let err = rss(&res.aggregated, &sim.truth, sim.data.x(), 20).unwrap();
    assert!(err < 0.6 * zero, "rss {err} vs zero-function {zero}");
    // Fresh design from the same distribution.
    let test = simulate(&SimSpec::new(1, 500, 20, 6).unwrap()).unwrap();
    let err_test = rss(&res.aggregated, &test.truth, test.data.x(), 20).unwrap();
    assert!(err_test.is_finite() && err_test < zero);
}

#[test]
fn plug_in_noise_variance_is_reasonable() {
    let sim = simulate(&SimSpec::new(1, 400, 10, 3).unwrap()).unwrap();
    let v = estimate_noise_var(&sim.data).unwrap();
    // A linear pilot leaves the curvature of the truth in the residual.
    assert!(v > 0.08 && v < 0.3, "{v}");
}

#[test]
fn explicit_and_theoretical_temperatures() {
    assert_eq!(resolve_delta(&Temperature::Practical { noise_var: 0.1 }, 200).unwrap(), 500.0);
    assert_eq!(resolve_delta(&Temperature::Explicit { delta: 7.0 }, 200).unwrap(), 7.0);
    assert!(resolve_delta(&Temperature::Explicit { delta: -1.0 }, 200).is_err());
}
