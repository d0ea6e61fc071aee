use dpcheck::{
    cvm_discrete, cvm_numeric_step, ContinuousCdf, ContinuousDistribution, DiscreteMeasure,
};
use proptest::prelude::*;

const BASES: [&str; 4] = ["normal(0,1)", "exp(2)", "t(3)", "uniform(-1,1)"];

fn base(idx: usize) -> ContinuousDistribution {
    BASES[idx].parse().unwrap()
}

// Atoms are placed at G-quantiles so every base gets atoms on its support.
fn measure_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=100).prop_flat_map(|m| {
        (
            prop::collection::vec(0.0005f64..0.9995, m),
            prop::collection::vec(0.001f64..1.0, m),
        )
    })
}

fn build(g: &ContinuousDistribution, probs: &[f64], weights: &[f64]) -> DiscreteMeasure {
    let atoms = probs.iter().map(|&p| g.quantile(p).unwrap()).collect();
    DiscreteMeasure::new(atoms, weights.to_vec()).unwrap()
}

// Midpoint rule on the u scale, independent of the step-wise integrator.
fn brute_force(measure: &DiscreteMeasure, g: &ContinuousDistribution) -> f64 {
    let k = 200_000;
    (0..k)
        .map(|i| {
            let u = (i as f64 + 0.5) / k as f64;
            let diff = measure.cdf(g.inverse_cdf(u)) - u;
            diff * diff
        })
        .sum::<f64>()
        / k as f64
}

fn sup_distance(measure: &DiscreteMeasure, g: &ContinuousDistribution) -> f64 {
    let mut below = 0.0;
    let mut sup: f64 = 0.0;
    for (&y, &w) in measure.atoms().iter().zip(measure.weights()) {
        let u = g.cdf(y);
        sup = sup.max((below - u).abs()).max((below + w - u).abs());
        below += w;
    }
    sup
}

// exp(X) for X ~ inner.
struct LogScale(ContinuousDistribution);

impl ContinuousCdf for LogScale {
    fn cdf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            0.0
        } else {
            self.0.cdf(y.ln())
        }
    }

    fn inverse_cdf(&self, p: f64) -> f64 {
        self.0.inverse_cdf(p).exp()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closed_form_matches_step_integration(idx in 0usize..4, (probs, weights) in measure_strategy()) {
        let g = base(idx);
        let m = build(&g, &probs, &weights);
        let closed = cvm_discrete(&m, &g).value();
        let numeric = cvm_numeric_step(&m, &g, 10_000).unwrap().value();
        prop_assert!((closed - numeric).abs() < 1e-6, "{} vs {}", closed, numeric);
    }

    #[test]
    fn bounded_by_sup_distance(idx in 0usize..4, (probs, weights) in measure_strategy()) {
        let g = base(idx);
        let m = build(&g, &probs, &weights);
        let d = cvm_discrete(&m, &g).value();
        let sup = sup_distance(&m, &g);
        prop_assert!(d >= 0.0);
        prop_assert!(d <= sup * sup + 1e-12, "d = {} > sup^2 = {}", d, sup * sup);
        prop_assert!(sup <= 1.0);
    }

    #[test]
    fn invariant_under_increasing_transform(idx in 0usize..3, (probs, weights) in measure_strategy()) {
        let g = base(idx);
        let m = build(&g, &probs, &weights);
        let mapped = DiscreteMeasure::new(m.atoms().iter().map(|y| y.exp()).collect(), m.weights().to_vec()).unwrap();
        let d = cvm_discrete(&m, &g).value();
        let d_mapped = cvm_discrete(&mapped, &LogScale(g)).value();
        prop_assert!((d - d_mapped).abs() < 1e-12, "{} vs {}", d, d_mapped);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn closed_form_matches_midpoint_rule(idx in 0usize..4, (probs, weights) in measure_strategy()) {
        let g = base(idx);
        let m = build(&g, &probs, &weights);
        let closed = cvm_discrete(&m, &g).value();
        prop_assert!((closed - brute_force(&m, &g)).abs() < 1e-5);
    }
}

#[test]
fn known_values() {
    let g = ContinuousDistribution::standard_normal();
    // A point mass anywhere: ∫ (1{u ≥ c} - u)^2 du = 1/3 - c + c^2.
    for c in [0.1, 0.5, 0.9] {
        let y = g.quantile(c).unwrap();
        let m = DiscreteMeasure::new(vec![y], vec![1.0]).unwrap();
        let c = g.cdf(y);
        let expected = 1.0 / 3.0 - c + c * c;
        assert!((cvm_discrete(&m, &g).value() - expected).abs() < 1e-12);
    }
}
