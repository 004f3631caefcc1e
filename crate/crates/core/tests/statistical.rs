use pavi::ensemble::{bicp_weights, build_candidates, WeightingConfig};
use pavi::paths::PenaltyKind;
use pavi::simharness::{run_models_under_check, Scenario, ScenarioSpec};
use pavi::Family;

/// Mean over seeds of Σ wₖ|𝒜ᵏ ∇ 𝒜*| / |𝒜*| under BIC-p weights.
fn mean_ratio(n: usize, seeds: u64) -> f64 {
    let scenario = Scenario::new(ScenarioSpec::example(1, Family::Binomial).unwrap().with_n(n)).unwrap();
    let total: f64 = (0..seeds)
        .map(|rep| {
            let data = scenario.generate(rep);
            let candidates = build_candidates(&data).unwrap();
            let ens = bicp_weights(&data, &candidates, &WeightingConfig::bicp()).unwrap();
            ens.weighted_sym_diff_ratio(scenario.true_support())
        })
        .sum();
    total / seeds as f64
}

#[test]
fn bicp_ensembles_concentrate_on_the_truth_as_n_grows() {
    let r: Vec<f64> = [200, 1000, 5000].iter().map(|&n| mean_ratio(n, 20)).collect();
    assert!(r[0] > r[1] && r[1] > r[2], "{r:?}");
    assert!(r[2] < 0.05, "{r:?}");
}

#[test]
fn high_dimensional_lasso_selects_more_than_mcp() {
    let scenario = Scenario::new(ScenarioSpec::example(3, Family::Gaussian).unwrap()).unwrap();
    let (mut lasso, mut mcp) = (0usize, 0usize);
    for rep in 0..3 {
        let data = scenario.generate(rep);
        for (kind, sel) in run_models_under_check(&data, 1000 + rep) {
            let size = sel.unwrap().len();
            match kind {
                PenaltyKind::Lasso => lasso += size,
                PenaltyKind::Mcp => mcp += size,
                _ => {}
            }
        }
    }
    assert!(lasso > mcp, "lasso {lasso} vs mcp {mcp}");
}
