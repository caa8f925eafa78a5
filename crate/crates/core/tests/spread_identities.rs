mod common;

use hc_influence::graph::{augment_with_bias, build_transition_system, edge_list_string, parse_edge_list, SeedSet, Weighting};
use hc_influence::spread::{
    absorption_from_fundamental, compute_fundamental_dense, compute_fundamental_neumann, influence_spread,
    new_seed_absorption, steady_state, steady_state_iterative, update_fundamental_rank1, Backend, IDENTITY_TOL,
};
use proptest::prelude::*;

fn seeds(v: &[usize]) -> SeedSet {
    SeedSet::new(v.to_vec()).unwrap()
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Distinct nodes below `n`, in the given order.
fn chain(n: usize, picks: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    for &p in picks {
        let mut s = p % n;
        while out.contains(&s) {
            s = (s + 1) % n;
        }
        out.push(s);
        if out.len() == n - 1 {
            break;
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transition_rows_are_stochastic(n in 2usize..40, p in 0.0f64..0.4, seed in any::<u64>()) {
        let aug = common::random_aug(n, p, seed);
        prop_assert!(aug.max_row_sum_error() < 1e-12);
        let ts = build_transition_system(&aug, &seeds(&[0])).unwrap();
        prop_assert!(ts.max_row_sum_error() < 1e-12);
        for i in ts.interior().iter().copied() {
            prop_assert!(ts.r().row_sum(ts.interior_position(i).unwrap()) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn fundamental_identity_holds(n in 2usize..40, p in 0.0f64..0.4, seed in any::<u64>(), picks in prop::collection::vec(any::<usize>(), 0..4)) {
        let aug = common::random_aug(n, p, seed);
        let ts = build_transition_system(&aug, &seeds(&chain(n, &picks))).unwrap();
        let f = compute_fundamental_dense(&ts).unwrap();
        prop_assert!(f.identity_residual(&ts).unwrap() < IDENTITY_TOL);
        for &i in f.interior() {
            prop_assert!(f.diagonal(i).unwrap() >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn rank_one_update_matches_fresh_solve(n in 3usize..40, p in 0.0f64..0.4, seed in any::<u64>(), picks in prop::collection::vec(any::<usize>(), 1..5)) {
        let aug = common::random_aug(n, p, seed);
        let order = chain(n, &picks);
        let mut f = compute_fundamental_dense(&build_transition_system(&aug, &SeedSet::empty()).unwrap()).unwrap();
        for k in 0..order.len() {
            let before = f.clone();
            f = update_fundamental_rank1(&f, order[k]).unwrap();
            let ts = build_transition_system(&aug, &seeds(&order[..=k])).unwrap();
            let fresh = compute_fundamental_dense(&ts).unwrap();
            prop_assert!(max_diff(&f.to_rows().unwrap(), &fresh.to_rows().unwrap()) < IDENTITY_TOL);
            for &i in f.interior() {
                prop_assert!((f.column_sum(i).unwrap() - fresh.column_sum(i).unwrap()).abs() < 1e-8);
            }

            // The new seed's absorption column from the old F.
            let q = absorption_from_fundamental(&fresh, &ts).unwrap();
            let lemma = new_seed_absorption(&before, order[k]).unwrap();
            for (&i, &x) in before.interior().iter().zip(&lemma) {
                let expect = if i == order[k] { 1.0 } else { q.get(i, order[k]).unwrap() };
                prop_assert!((x - expect).abs() < IDENTITY_TOL, "node {} lemma {} direct {}", i, x, expect);
            }
        }
    }

    #[test]
    fn absorption_rows_sum_to_one(n in 2usize..30, p in 0.0f64..0.5, seed in any::<u64>(), picks in prop::collection::vec(any::<usize>(), 0..3)) {
        let aug = common::random_aug(n, p, seed);
        let ts = build_transition_system(&aug, &seeds(&chain(n, &picks))).unwrap();
        let q = absorption_from_fundamental(&compute_fundamental_dense(&ts).unwrap(), &ts).unwrap();
        for r in q.row_sums() {
            prop_assert!((r - 1.0).abs() < IDENTITY_TOL);
        }
    }

    #[test]
    fn steady_state_is_harmonic_and_bounded(n in 2usize..40, p in 0.0f64..0.4, seed in any::<u64>(), b in 0.0f64..1.0, picks in prop::collection::vec(any::<usize>(), 0..4)) {
        let net = common::random_network(n, p, 0.2, seed);
        let aug = augment_with_bias(&net, b).unwrap();
        let ts = build_transition_system(&aug, &seeds(&chain(n, &picks))).unwrap();
        let st = steady_state(&ts, b).unwrap();
        prop_assert!(st.harmonic_residual(&ts) < 1e-10);
        prop_assert!(st.v.iter().all(|&x| (0.0..=1.0).contains(&x)));
        let it = steady_state_iterative(&augment_with_bias(&net, 0.0).unwrap(), ts.seeds(), None, 1e-14).unwrap();
        let direct = steady_state(&ts, 0.0).unwrap();
        prop_assert!((it.sigma - direct.sigma).abs() < 1e-9);
    }

    #[test]
    fn spread_is_monotone_and_submodular(n in 4usize..25, p in 0.05f64..0.4, seed in any::<u64>(), picks in prop::collection::vec(any::<usize>(), 3..6)) {
        let aug = common::random_aug(n, p, seed);
        let order = chain(n, &picks);
        let (s, rest) = order.split_last().unwrap();
        let small = seeds(&rest[..rest.len() / 2]);
        let large = seeds(rest);
        let sig = |set: &SeedSet| influence_spread(&aug, set, Backend::Dense).unwrap();
        let gain_small = sig(&small.with(*s).unwrap()) - sig(&small);
        let gain_large = sig(&large.with(*s).unwrap()) - sig(&large);
        prop_assert!(gain_small >= gain_large - 1e-9);
        prop_assert!(gain_large >= -1e-9);
    }

    #[test]
    fn neumann_converges_to_dense(n in 2usize..30, p in 0.0f64..0.3, seed in any::<u64>()) {
        let aug = common::random_aug(n, p, seed);
        let ts = build_transition_system(&aug, &seeds(&[0])).unwrap();
        let dense = compute_fundamental_dense(&ts).unwrap();
        // Spectral radius of R is at most 0.9 here, 0.9^400 < 1e-18.
        let series = compute_fundamental_neumann(&ts, 400);
        for &i in dense.interior() {
            prop_assert!((dense.diagonal(i).unwrap() - series.diagonal(i).unwrap()).abs() < 1e-9);
            prop_assert!((dense.column_sum(i).unwrap() - series.column_sum(i).unwrap()).abs() < 1e-8);
        }
        let a = influence_spread(&aug, &seeds(&[0]), Backend::Dense).unwrap();
        let b = influence_spread(&aug, &seeds(&[0]), Backend::Neumann { terms: 400 }).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn edge_list_round_trips(n in 2usize..30, p in 0.0f64..0.5, seed in any::<u64>()) {
        let net = common::random_network(n, p, 0.1, seed);
        let text = edge_list_string(&net);
        let back = parse_edge_list(&text, Weighting::Explicit, 0).unwrap();
        // Isolated high-index nodes are not recoverable from an edge list.
        prop_assert_eq!(back.edges(), net.edges());
    }
}

#[test]
fn trivial_spread_values() {
    let aug = common::random_aug(12, 0.3, 5);
    let all: Vec<usize> = (0..12).collect();
    assert_eq!(influence_spread(&aug, &seeds(&all), Backend::Dense).unwrap(), 12.0);
    assert_eq!(influence_spread(&aug, &SeedSet::empty(), Backend::Dense).unwrap(), 0.0);
    let ts = build_transition_system(&aug, &seeds(&all)).unwrap();
    assert!(ts.interior().is_empty());
    assert_eq!(ts.r().rows(), 0);
}
