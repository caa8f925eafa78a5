use std::collections::HashSet;

use hc_influence::generators::{generate_forest_fire, generate_kronecker, ForestFireSpec, KroneckerSpec};
use proptest::prelude::*;

#[test]
fn forest_fire_density_matches_the_reported_value() {
    let densities: Vec<f64> = (0..10)
        .map(|seed| {
            let net = generate_forest_fire(&ForestFireSpec::new(10_000, 0.35, 0.25, seed)).unwrap();
            net.edge_count() as f64 / net.n_raw() as f64
        })
        .collect();
    let mean = densities.iter().sum::<f64>() / densities.len() as f64;
    assert!((mean - 2.5).abs() <= 0.5, "mean density {mean}, per seed {densities:?}");
}

#[test]
fn forest_fire_reaches_node_zero_from_everywhere() {
    let net = generate_forest_fire(&ForestFireSpec::new(2_000, 0.35, 0.25, 8)).unwrap();
    let mut reaches = vec![false; net.n_raw()];
    reaches[0] = true;
    // Every node follows older nodes only, so one ascending pass settles it.
    for v in 1..net.n_raw() {
        reaches[v] = net.out_edges(v).iter().any(|e| reaches[e.dst]);
    }
    assert!(reaches.iter().all(|&r| r));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn kronecker_has_no_self_loops_or_duplicates(
        power in 1u32..8,
        entries in prop::array::uniform4(0.0f64..1.0),
        seed in any::<u64>(),
    ) {
        let spec = KroneckerSpec::new([[entries[0], entries[1]], [entries[2], entries[3]]], power, seed);
        let net = generate_kronecker(&spec).unwrap();
        let mut seen = HashSet::new();
        for e in net.edges() {
            prop_assert_ne!(e.src, e.dst);
            prop_assert!(seen.insert((e.src, e.dst)));
        }
        let again = generate_kronecker(&spec).unwrap();
        prop_assert_eq!(again.edges(), net.edges());
    }

    #[test]
    fn forest_fire_is_reproducible(n in 1usize..300, pf in 0.0f64..0.6, pb in 0.0f64..0.6, seed in any::<u64>()) {
        let spec = ForestFireSpec::new(n, pf, pb, seed);
        let net = generate_forest_fire(&spec).unwrap();
        let again = generate_forest_fire(&spec).unwrap();
        prop_assert_eq!(again.edges(), net.edges());
        for i in 0..net.n_raw() {
            let total: f64 = net.out_edges(i).iter().map(|e| e.weight).sum();
            prop_assert!(net.out_degree(i) == 0 || (total - 1.0).abs() < 1e-12);
        }
    }
}
