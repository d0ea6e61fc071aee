use dpcheck::data::{read_samples, report_from_json, report_to_json, write_samples};
use dpcheck::scenario::{kevlar_standin, read_records_csv, write_records_csv};
use dpcheck::{
    relative_belief, run_check, run_scenario, run_scenarios, table_scenarios, CheckConfig,
    ContinuousDistribution, ParametricFamily, RngStream, Scenario,
};

fn normal_data(n: usize, spec: &str, seed: u64) -> Vec<f64> {
    let d: ContinuousDistribution = spec.parse().unwrap();
    let mut rng = RngStream::new(seed, 0).rng();
    (0..n).map(|_| d.sample(&mut rng)).collect()
}

fn scenario(distribution: &str, n: usize, a: f64, seed: u64) -> Scenario {
    Scenario {
        id: format!("{distribution}-{n}"),
        distribution: distribution.parse().unwrap(),
        family: ParametricFamily::LocationNormal,
        n,
        a: vec![a],
        replications: 20,
        seed,
        base_override: None,
        d_min: false,
    }
}

#[test]
fn identical_inputs_give_identical_reports() {
    let x = normal_data(20, "normal(0,1)", 1);
    let cfg = CheckConfig::default().with_seed(99);
    let a = run_check(&x, ParametricFamily::LocationScaleNormal, None, &cfg).unwrap();
    let b = run_check(&x, ParametricFamily::LocationScaleNormal, None, &cfg).unwrap();
    assert_eq!(a, b);
    let c = run_check(
        &x,
        ParametricFamily::LocationScaleNormal,
        None,
        &cfg.with_seed(100),
    )
    .unwrap();
    assert_ne!(a.prior_distances, c.prior_distances);
}

#[test]
fn report_json_round_trips() {
    let x = normal_data(30, "exp(2)", 2);
    let cfg = CheckConfig {
        r1: 200,
        r2: 200,
        ..CheckConfig::default()
    };
    let report = run_check(&x, ParametricFamily::ScaleExponential, None, &cfg).unwrap();
    let json = report_to_json(&report).unwrap();
    assert_eq!(report_from_json(&json).unwrap(), report);

    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    for key in [
        "family",
        "theta",
        "a",
        "N",
        "r1",
        "r2",
        "M",
        "p0",
        "d_quantiles",
        "rb_bins",
        "rb_at_zero",
        "strength",
        "warnings",
    ] {
        assert!(value.get(key).is_some(), "missing {key}");
    }
    assert_eq!(value["family"], "scale-exponential");
    assert_eq!(value["d_quantiles"].as_array().unwrap().len(), 21);
    assert_eq!(value["rb_bins"].as_array().unwrap().len(), 20);
}

#[test]
fn samples_file_round_trips_report_draws() {
    let x = normal_data(20, "normal(0,1)", 3);
    let cfg = CheckConfig {
        r1: 150,
        r2: 120,
        ..CheckConfig::default()
    };
    let report = run_check(&x, ParametricFamily::LocationNormal, None, &cfg).unwrap();
    let mut buf = Vec::new();
    write_samples(
        &mut buf,
        &report.prior_distances,
        &report.posterior_distances,
    )
    .unwrap();
    let (prior, posterior) = read_samples(buf.as_slice()).unwrap();
    assert_eq!(prior, report.prior_distances);
    assert_eq!(posterior, report.posterior_distances);
}

#[test]
fn prior_bins_hold_one_mth_of_the_prior() {
    let x = normal_data(20, "normal(0,1)", 4);
    let report = run_check(
        &x,
        ParametricFamily::LocationNormal,
        None,
        &CheckConfig::default(),
    )
    .unwrap();
    let prior = &report.prior_distances;
    let e = relative_belief(prior, prior, report.bins, report.i0).unwrap();
    for (i, rb) in e.rb_bins.iter().enumerate() {
        assert!((rb - 1.0).abs() < 1e-12, "bin {i}: {rb}");
    }
    let total: f64 = report.posterior_bin_mass.iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn warns_when_a_is_large_relative_to_n() {
    let x = normal_data(20, "normal(0,1)", 5);
    let cfg = CheckConfig {
        r1: 200,
        r2: 200,
        ..CheckConfig::default()
    };
    let quiet = run_check(&x, ParametricFamily::LocationNormal, None, &cfg.with_a(5.0)).unwrap();
    assert!(quiet.warnings.is_empty(), "{:?}", quiet.warnings);
    let loud = run_check(&x, ParametricFamily::LocationNormal, None, &cfg.with_a(6.0)).unwrap();
    assert!(loud.warnings.iter().any(|w| w.contains("0.25 n")));
}

#[test]
fn exponential_model_rejects_negative_data() {
    let x = normal_data(20, "normal(0,1)", 6);
    assert!(run_check(
        &x,
        ParametricFamily::ScaleExponential,
        None,
        &CheckConfig::default()
    )
    .is_err());
}

#[test]
fn true_model_evidence_grows_with_n() {
    let small = run_scenario(
        &scenario("normal(0,1)", 20, 1.0, 701),
        &CheckConfig::default(),
    )
    .unwrap();
    let large = run_scenario(
        &scenario("normal(0,1)", 200, 1.0, 702),
        &CheckConfig::default(),
    )
    .unwrap();
    let pairs: Vec<(f64, f64)> = small[0]
        .rb
        .iter()
        .copied()
        .zip(large[0].rb.iter().copied())
        .collect();
    let grew = pairs.iter().filter(|(s, l)| l > s).count();
    assert!(grew >= 18, "{grew}/20 grew: {pairs:?}");
}

#[test]
fn false_model_evidence_vanishes_with_n() {
    let rows = run_scenario(
        &scenario("normal(0,9)", 200, 10.0, 703),
        &CheckConfig::default(),
    )
    .unwrap();
    let small = rows[0].rb.iter().filter(|&&r| r < 0.1).count();
    assert!(small >= 18, "{:?}", rows[0].rb);
}

#[test]
fn kevlar_standin_is_judged_non_normal_at_a_20() {
    let x = kevlar_standin(1);
    let report = run_check(
        &x,
        ParametricFamily::LocationScaleNormal,
        None,
        &CheckConfig::default().with_a(20.0),
    )
    .unwrap();
    assert!((report.theta[0] - 209.171).abs() < 1e-9);
    assert!(report.rb_at_zero < 1.0, "{}", report.summary());
    assert!(report.warnings.is_empty());
}

#[test]
fn simulation_is_reproducible_and_lossless() {
    let cfg = CheckConfig {
        r1: 200,
        r2: 200,
        ..CheckConfig::default()
    };
    let mut scenarios = table_scenarios(5, 2, 13).unwrap();
    scenarios.truncate(4);
    let a = run_scenarios(&scenarios, &cfg).unwrap();
    let b = run_scenarios(&scenarios, &cfg).unwrap();
    assert_eq!(a, b);
    let mut csv = Vec::new();
    write_records_csv(&mut csv, &a).unwrap();
    let mut again = Vec::new();
    write_records_csv(&mut again, &b).unwrap();
    assert_eq!(csv, again);
    assert_eq!(a.len(), 12);
    // Row order follows scenario order.
    let ids: Vec<&str> = a.iter().map(|r| r.scenario.as_str()).collect();
    assert_eq!(ids[0], "table5-01");
    assert_eq!(ids[11], "table5-04");
    // Normal data are not positive, so the exponential fit fails.
    assert_eq!(a[0].failures, 2);
    assert_eq!(a[0].rb_median, None);
    assert!(a[0].first_error.as_deref().unwrap().contains("positive"));

    assert_eq!(read_records_csv(csv.as_slice()).unwrap(), a);
    let json = serde_json::to_string(&a).unwrap();
    let from_json: Vec<dpcheck::ResultRecord> = serde_json::from_str(&json).unwrap();
    assert_eq!(from_json, a);
}
