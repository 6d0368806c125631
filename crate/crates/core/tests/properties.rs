mod common;

use common::{build, oracle_influence, random_arcs, random_set};
use followcast::objective::{evaluate_set, MonteCarloObjective, Objective};
use followcast::select::{greedy_select, GreedyOptions};
use followcast::{
    build_sample_bank, condense, estimate_influence, generate_configuration_graph, prune, DegreeSpec, Metric,
    ReciprocationModel,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn metric_strategy() -> impl Strategy<Value = Metric> {
    prop_oneof![Just(Metric::Retweeters), Just(Metric::Readers)]
}

fn recip_strategy() -> impl Strategy<Value = ReciprocationModel> {
    prop_oneof![
        Just(ReciprocationModel::Certain),
        Just(ReciprocationModel::RatioFormula),
        (0.0f64..=1.0).prop_map(ReciprocationModel::Constant),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lazy_and_eager_greedy_agree(
        graph_seed in 0u64..1000,
        p in 0.01f64..0.6,
        metric in metric_strategy(),
        model in recip_strategy(),
        k in 1usize..8,
    ) {
        let g = generate_configuration_graph(&DegreeSpec::power_law(2.2, 1, 25), 120, graph_seed).unwrap();
        let bank = build_sample_bank(&g, p, 12, graph_seed).unwrap();
        let obj = MonteCarloObjective::new(&g, &bank, metric, &model).unwrap();
        let lazy = greedy_select(&obj, k, GreedyOptions::lazy()).unwrap();
        let eager = greedy_select(&obj, k, GreedyOptions::eager()).unwrap();
        prop_assert_eq!(&lazy.picks, &eager.picks);
        prop_assert_eq!(&lazy.gains, &eager.gains);
        // diminishing gains and a non-decreasing curve
        for w in lazy.gains.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9);
        }
        for w in lazy.objective_curve.windows(2) {
            prop_assert!(w[1].mean >= w[0].mean - 1e-9);
        }
    }

    #[test]
    fn incremental_value_matches_direct_estimate(
        graph_seed in 0u64..1000,
        p in 0.0f64..=1.0,
        metric in metric_strategy(),
        picks in prop::collection::vec(0u32..80, 0..6),
    ) {
        let g = generate_configuration_graph(&DegreeSpec::power_law(2.5, 1, 15), 80, graph_seed).unwrap();
        let bank = build_sample_bank(&g, p, 9, graph_seed ^ 5).unwrap();
        let obj = MonteCarloObjective::new(&g, &bank, metric, &ReciprocationModel::Certain).unwrap();
        let (with, without) = evaluate_set(&obj, &picks);
        let mut distinct = picks.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let direct = estimate_influence(&bank, &g, &distinct, metric).unwrap();
        prop_assert!((with.mean - direct.mean).abs() < 1e-9);
        prop_assert!((with.mean - without.mean - distinct.len() as f64).abs() < 1e-9);
    }

    #[test]
    fn gains_equal_value_differences(
        graph_seed in 0u64..1000,
        p in 0.05f64..0.5,
        metric in metric_strategy(),
        first in 0u32..60,
        second in 0u32..60,
    ) {
        let g = generate_configuration_graph(&DegreeSpec::power_law(2.5, 1, 12), 60, graph_seed).unwrap();
        let bank = build_sample_bank(&g, p, 7, graph_seed).unwrap();
        let obj = MonteCarloObjective::new(&g, &bank, metric, &ReciprocationModel::Certain).unwrap();
        let mut state = obj.initial_state();
        obj.commit(&mut state, first);
        let before = obj.value(&state).mean;
        let gain = obj.gain(&state, second);
        obj.commit(&mut state, second);
        prop_assert!((obj.value(&state).mean - before - gain).abs() < 1e-9);
    }

    #[test]
    fn reach_grows_with_p(
        graph_seed in 0u64..1000,
        seed in any::<u64>(),
        lo in 0.0f64..=1.0,
        hi in 0.0f64..=1.0,
        sources in prop::collection::vec(0u32..100, 1..4),
    ) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let g = generate_configuration_graph(&DegreeSpec::power_law(2.3, 1, 20), 100, graph_seed).unwrap();
        let small = condense(&prune(&g, lo, seed)).reach_set(&sources);
        let large = condense(&prune(&g, hi, seed)).reach_set(&sources);
        prop_assert!(small.iter().all(|v| large.binary_search(v).is_ok()));
    }
}

#[test]
fn reciprocating_estimate_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let trials = 60;
    let mut within = 0;
    for t in 0..trials {
        let n = rng.random_range(2..=8);
        let arcs = random_arcs(&mut rng, n, 12);
        let g = build(n, &arcs);
        let p = rng.random_range(0.1..1.0);
        let r: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
        let seeds = random_set(&mut rng, n, 3);
        let metric = if t % 2 == 0 { Metric::Retweeters } else { Metric::Readers };
        let bank = build_sample_bank(&g, p, 3000, t).unwrap();
        let obj = MonteCarloObjective::new(&g, &bank, metric, &ReciprocationModel::Table(r.clone())).unwrap();
        let (est, _) = evaluate_set(&obj, &seeds);
        let truth = oracle_influence(n, &arcs, &seeds, p, metric, Some(&r));
        if (est.mean - truth).abs() <= 3.0 * est.stderr + 1e-9 {
            within += 1;
        }
    }
    assert!(within >= 56, "{within}/{trials} within 3 stderr");
}
