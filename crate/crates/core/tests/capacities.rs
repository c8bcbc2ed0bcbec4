use bmatch_core::capacity::{gini, CapacityModel};
use bmatch_core::mr::MrEngine;
use bmatch_core::synth::{synth_dataset, SynthSpec};
use bmatch_core::Side;

fn spec(activity_exponent: f64, capacity_model: CapacityModel) -> SynthSpec {
    SynthSpec {
        items: 80,
        consumers: 80,
        vocab: 100,
        activity_exponent,
        max_activity: 1000.0,
        alpha: 1.0,
        capacity_model,
        ..SynthSpec::default()
    }
}

fn mean_gini(exponent: f64, side: Side) -> f64 {
    let seeds = 20;
    let total: f64 = (0..seeds)
        .map(|seed| {
            let d = synth_dataset(
                &mut MrEngine::new(seed, 1),
                &spec(exponent, CapacityModel::Favorites),
                seed,
            )
            .unwrap();
            let caps: Vec<f64> = d
                .graph
                .capacities()
                .iter()
                .filter(|(v, _)| v.side == side)
                .map(|(_, &b)| f64::from(b))
                .collect();
            gini(&caps)
        })
        .sum();
    total / seeds as f64
}

#[test]
fn heavier_tail_gives_more_skewed_capacities() {
    for side in [Side::Item, Side::Consumer] {
        let g: Vec<f64> = [0.0, 0.3, 0.6, 0.9]
            .iter()
            .map(|&a| mean_gini(a, side))
            .collect();
        assert!(g.windows(2).all(|w| w[0] < w[1]), "{side:?}: {g:?}");
        assert_eq!(g[0], 0.0, "exponent 0 gives equal activity");
    }
}

#[test]
fn every_model_gives_positive_capacities() {
    for model in [
        CapacityModel::Uniform,
        CapacityModel::Quality,
        CapacityModel::Favorites,
        CapacityModel::Question,
    ] {
        for seed in 0..5 {
            let d = synth_dataset(&mut MrEngine::new(seed, 1), &spec(0.7, model), seed).unwrap();
            assert!(d.graph.capacities().values().all(|&b| b >= 1), "{model:?}");
            assert_eq!(d.budget.item_total, d.graph.total_capacity(Side::Item));
            assert_eq!(
                d.budget.consumer_total,
                d.graph.total_capacity(Side::Consumer)
            );
        }
    }
}
