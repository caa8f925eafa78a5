//! Synthetic benchmark networks and the effective-diameter estimate used to
//! pick the truncation depth of the series backend.

use std::collections::VecDeque;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, Network, Weighting};

pub const DEFAULT_DIAMETER_QUANTILE: f64 = 0.9;
pub const DEFAULT_DIAMETER_SAMPLES: usize = 1000;

/// Largest Kronecker power we are willing to sample pair by pair (4^16 pairs).
pub const MAX_KRONECKER_POWER: u32 = 16;

/// Stochastic Kronecker graph on `2^power` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KroneckerSpec {
    pub initiator: [[f64; 2]; 2],
    pub power: u32,
    #[serde(default)]
    pub rng_seed: u64,
}

impl KroneckerSpec {
    pub const RANDOM: [[f64; 2]; 2] = [[0.5, 0.5], [0.5, 0.5]];
    pub const HIERARCHICAL: [[f64; 2]; 2] = [[0.9, 0.1], [0.1, 0.9]];
    pub const CORE_PERIPHERY: [[f64; 2]; 2] = [[0.9, 0.5], [0.5, 0.3]];

    pub fn new(initiator: [[f64; 2]; 2], power: u32, rng_seed: u64) -> Self {
        Self {
            initiator,
            power,
            rng_seed,
        }
    }

    /// Expected number of sampled edges once self-loops are dropped.
    pub fn expected_edges(&self) -> f64 {
        let [[a, b], [c, d]] = self.initiator;
        (a + b + c + d).powi(self.power as i32) - (a + d).powi(self.power as i32)
    }
}

/// Samples every ordered pair `(i, j)`, `i != j`, independently with
/// probability `prod_k initiator[bit_k(i)][bit_k(j)]`, then draws `U(0,1)`
/// weights normalized per node.
pub fn generate_kronecker(spec: &KroneckerSpec) -> Result<Network> {
    if spec.power == 0 {
        return Err(Error::validation("Kronecker power must be at least 1"));
    }
    if spec.power >= usize::BITS || spec.power > MAX_KRONECKER_POWER {
        return Err(Error::Capacity(format!(
            "Kronecker power {} exceeds the supported maximum {MAX_KRONECKER_POWER}",
            spec.power
        )));
    }
    if spec.initiator.iter().flatten().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::validation("initiator entries must lie in [0, 1]"));
    }
    let n = 1usize << spec.power;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut p = 1.0;
            for k in 0..spec.power {
                p *= spec.initiator[(i >> k) & 1][(j >> k) & 1];
            }
            if p > 0.0 && (p >= 1.0 || rng.random::<f64>() < p) {
                edges.push(Edge::new(i, j, 1.0));
            }
        }
    }
    Ok(Network::new(n, edges)?.reweighted(Weighting::UniformRandom, rng.random()))
}

/// Forest-fire growth model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestFireSpec {
    pub n_target: usize,
    pub p_forward: f64,
    pub p_backward: f64,
    #[serde(default)]
    pub rng_seed: u64,
}

impl ForestFireSpec {
    pub fn new(n_target: usize, p_forward: f64, p_backward: f64, rng_seed: u64) -> Self {
        Self {
            n_target,
            p_forward,
            p_backward,
            rng_seed,
        }
    }
}

/// Number of successes before the first failure, success probability `p`.
fn geometric(rng: &mut impl Rng, p: f64) -> usize {
    let mut k = 0;
    while p > 0.0 && rng.random::<f64>() < p {
        k += 1;
    }
    k
}

/// Each new node follows a uniformly chosen ambassador, then spreads the fire:
/// from every burning node it burns a geometric number of not-yet-visited
/// out-links (mean `p_f / (1 - p_f)`) and in-links (mean `p_b / (1 - p_b)`),
/// follows every burned node, and recurses breadth first. Weights are
/// `1 / out-degree`.
pub fn generate_forest_fire(spec: &ForestFireSpec) -> Result<Network> {
    if spec.n_target == 0 {
        return Err(Error::validation("forest fire needs at least one node"));
    }
    for p in [spec.p_forward, spec.p_backward] {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::validation(format!("burning probability {p} must lie in [0, 1)")));
        }
    }
    let n = spec.n_target;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut out_links: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut in_links: Vec<Vec<usize>> = vec![Vec::new(); n];
    // Visit stamps avoid clearing a visited set for every arrival.
    let mut stamp = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    let mut candidates = Vec::new();

    for v in 1..n {
        let ambassador = rng.random_range(0..v);
        stamp[v] = v;
        stamp[ambassador] = v;
        let mut burned = vec![ambassador];
        queue.clear();
        queue.push_back(ambassador);
        while let Some(x) = queue.pop_front() {
            for (links, p) in [(&out_links[x], spec.p_forward), (&in_links[x], spec.p_backward)] {
                let want = geometric(&mut rng, p);
                if want == 0 {
                    continue;
                }
                candidates.clear();
                candidates.extend(links.iter().copied().filter(|&y| stamp[y] != v));
                let take = want.min(candidates.len());
                for k in index::sample(&mut rng, candidates.len(), take).into_iter() {
                    let y = candidates[k];
                    stamp[y] = v;
                    burned.push(y);
                    queue.push_back(y);
                }
            }
        }
        for &y in &burned {
            in_links[y].push(v);
        }
        out_links[v] = burned;
    }

    let edges = out_links
        .iter()
        .enumerate()
        .flat_map(|(v, outs)| outs.iter().map(move |&y| Edge::new(v, y, 1.0)))
        .collect();
    Ok(Network::new(n, edges)?.reweighted(Weighting::InverseOutDegree, 0))
}

/// Hop count covering `quantile` of the reachable ordered pairs, measured by
/// BFS along follow edges from `sample_size` random sources (all nodes when
/// the sample covers the graph).
pub fn estimate_effective_diameter(
    net: &Network,
    sample_size: usize,
    quantile: f64,
    rng_seed: u64,
) -> Result<usize> {
    if !(quantile > 0.0 && quantile <= 1.0) {
        return Err(Error::validation(format!("quantile {quantile} must lie in (0, 1]")));
    }
    let n = net.n_raw();
    if n == 0 || net.edge_count() == 0 {
        return Err(Error::validation("effective diameter of an empty graph"));
    }
    let sources: Vec<usize> = if sample_size >= n {
        (0..n).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        index::sample(&mut rng, n, sample_size.max(1)).into_vec()
    };

    let mut histogram: Vec<u64> = Vec::new();
    let mut dist = vec![usize::MAX; n];
    let mut touched = Vec::new();
    let mut queue = VecDeque::new();
    for &s in &sources {
        for &t in &touched {
            dist[t] = usize::MAX;
        }
        touched.clear();
        dist[s] = 0;
        touched.push(s);
        queue.push_back(s);
        while let Some(x) = queue.pop_front() {
            for e in net.out_edges(x) {
                if dist[e.dst] == usize::MAX {
                    let d = dist[x] + 1;
                    dist[e.dst] = d;
                    touched.push(e.dst);
                    queue.push_back(e.dst);
                    if histogram.len() <= d {
                        histogram.resize(d + 1, 0);
                    }
                    histogram[d] += 1;
                }
            }
        }
    }
    let total: u64 = histogram.iter().sum();
    if total == 0 {
        return Err(Error::validation("no reachable pairs among the sampled sources"));
    }
    let target = quantile * total as f64;
    let mut cumulative = 0u64;
    for (d, &count) in histogram.iter().enumerate() {
        cumulative += count;
        if cumulative as f64 >= target * (1.0 - 1e-12) {
            return Ok(d);
        }
    }
    Ok(histogram.len() - 1)
}
