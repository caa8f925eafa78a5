#![allow(dead_code)]

use hc_influence::graph::{augment_with_bias, AugmentedNetwork, Edge, Network, Weighting};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Directed Erdős–Rényi follow graph, uniform-random weights, uniform beta.
pub fn random_network(n: usize, p: f64, beta: f64, seed: u64) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random::<f64>() < p {
                edges.push(Edge::new(i, j, 1.0));
            }
        }
    }
    Network::new(n, edges)
        .unwrap()
        .reweighted(Weighting::UniformRandom, seed)
        .with_uniform_beta(beta)
        .unwrap()
}

pub fn random_aug(n: usize, p: f64, seed: u64) -> AugmentedNetwork {
    augment_with_bias(&random_network(n, p, 0.1, seed), 0.0).unwrap()
}

/// Every node follows its `k` successors on a ring, weights `1 / k`: a
/// doubly stochastic walk.
pub fn circulant(n: usize, k: usize, beta: f64) -> Network {
    let edges = (0..n)
        .flat_map(|i| (1..=k).map(move |d| Edge::new(i, (i + d) % n, 1.0)))
        .collect();
    Network::new(n, edges)
        .unwrap()
        .reweighted(Weighting::InverseOutDegree, 0)
        .with_uniform_beta(beta)
        .unwrap()
}

/// Zachary's karate club, 34 members, 78 friendships, both directions.
pub const KARATE_CLUB: &[(usize, usize)] = &[
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8), (0, 10), (0, 11), (0, 12), (0, 13),
    (0, 17), (0, 19), (0, 21), (0, 31), (1, 2), (1, 3), (1, 7), (1, 13), (1, 17), (1, 19), (1, 21),
    (1, 30), (2, 3), (2, 7), (2, 8), (2, 9), (2, 13), (2, 27), (2, 28), (2, 32), (3, 7), (3, 12),
    (3, 13), (4, 6), (4, 10), (5, 6), (5, 10), (5, 16), (6, 16), (8, 30), (8, 32), (8, 33), (9, 33),
    (13, 33), (14, 32), (14, 33), (15, 32), (15, 33), (18, 32), (18, 33), (19, 33), (20, 32),
    (20, 33), (22, 32), (22, 33), (23, 25), (23, 27), (23, 29), (23, 32), (23, 33), (24, 25),
    (24, 27), (24, 31), (25, 31), (26, 29), (26, 33), (27, 33), (28, 31), (28, 33), (29, 32),
    (29, 33), (30, 32), (30, 33), (31, 32), (31, 33), (32, 33),
];

pub fn karate_club() -> Network {
    let edges = KARATE_CLUB
        .iter()
        .flat_map(|&(a, b)| [Edge::new(a, b, 1.0), Edge::new(b, a, 1.0)])
        .collect();
    Network::new(34, edges)
        .unwrap()
        .reweighted(Weighting::InverseOutDegree, 0)
        .with_uniform_beta(0.1)
        .unwrap()
}
