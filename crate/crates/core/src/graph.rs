//! Influence networks, the bias-node augmentation, and seed-conditioned
//! transition systems.
//!
//! An edge `(src, dst, w)` means `src` follows `dst`: `dst` influences `src`
//! with trust weight `w`. A random walk on the resulting transition matrix
//! therefore moves from a follower towards the nodes it trusts, and the
//! adoption probability of a node is the probability that such a walk is
//! absorbed at an active boundary node.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Bias strength used when nothing else is configured.
pub const DEFAULT_BETA: f64 = 0.1;

/// Row sums of transition matrices must hit 1 within this tolerance.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// How edge weights are assigned when an edge list is loaded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Take the third column of the file verbatim.
    Explicit,
    /// Draw `U(0,1)` per edge, then normalize each node's outgoing weights.
    UniformRandom,
    /// `1 / out-degree(src)`.
    InverseOutDegree,
    /// `1 / in-degree(dst)`.
    WeightedCascade,
}

impl std::str::FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit" => Ok(Weighting::Explicit),
            "uniform_random" => Ok(Weighting::UniformRandom),
            "inverse_out_degree" => Ok(Weighting::InverseOutDegree),
            "weighted_cascade" => Ok(Weighting::WeightedCascade),
            other => Err(Error::Config(format!("unknown weighting scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(src: usize, dst: usize, weight: f64) -> Self {
        Self { src, dst, weight }
    }
}

/// Directed weighted influence network with per-node bias strengths.
#[derive(Debug, Clone)]
pub struct Network {
    n_raw: usize,
    /// Sorted by `(src, dst)`.
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    beta: Vec<f64>,
    media: f64,
    reluctance: f64,
    /// `None` means alpha tracks beta.
    alpha: Option<Vec<f64>>,
    gamma: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl Network {
    /// Validates and stores the edges. Every node starts with `beta = DEFAULT_BETA`.
    pub fn new(n_raw: usize, mut edges: Vec<Edge>) -> Result<Self> {
        for e in &edges {
            if e.src >= n_raw || e.dst >= n_raw {
                return Err(Error::validation(format!(
                    "edge {} -> {} references a node outside 0..{n_raw}",
                    e.src, e.dst
                )));
            }
            if e.src == e.dst {
                return Err(Error::validation(format!("self-loop on node {}", e.src)));
            }
            if !e.weight.is_finite() || e.weight < 0.0 {
                return Err(Error::validation(format!(
                    "edge {} -> {} has invalid weight {}",
                    e.src, e.dst, e.weight
                )));
            }
        }
        edges.sort_by_key(|e| (e.src, e.dst));
        if let Some(w) = edges
            .windows(2)
            .find(|w| (w[0].src, w[0].dst) == (w[1].src, w[1].dst))
        {
            return Err(Error::validation(format!(
                "duplicate edge {} -> {}",
                w[0].src, w[0].dst
            )));
        }
        let mut offsets = vec![0usize; n_raw + 1];
        for e in &edges {
            offsets[e.src + 1] += 1;
        }
        for i in 0..n_raw {
            offsets[i + 1] += offsets[i];
        }
        Ok(Self {
            n_raw,
            edges,
            offsets,
            beta: vec![DEFAULT_BETA; n_raw],
            media: 1.0,
            reluctance: 0.0,
            alpha: None,
            gamma: vec![0.0; n_raw],
            labels: None,
        })
    }

    /// Sets the same bias strength on every node.
    pub fn with_uniform_beta(self, beta: f64) -> Result<Self> {
        let n = self.n_raw;
        self.with_beta(vec![beta; n])
    }

    pub fn with_beta(mut self, beta: Vec<f64>) -> Result<Self> {
        if beta.len() != self.n_raw {
            return Err(Error::validation(format!(
                "expected {} bias strengths, got {}",
                self.n_raw,
                beta.len()
            )));
        }
        if let Some((i, b)) = beta
            .iter()
            .enumerate()
            .find(|(_, b)| !(0.0..1.0).contains(*b))
        {
            return Err(Error::validation(format!(
                "beta of node {i} is {b}, must lie in [0, 1)"
            )));
        }
        self.beta = beta;
        Ok(self)
    }

    /// Media (`alpha`) and reluctance (`gamma`) weights of the generalized model.
    pub fn with_general_factors(mut self, alpha: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        if alpha.len() != self.n_raw || gamma.len() != self.n_raw {
            return Err(Error::validation("alpha/gamma length must equal node count"));
        }
        for i in 0..self.n_raw {
            let (a, g) = (alpha[i], gamma[i]);
            if a < 0.0 || g < 0.0 || a + g > 1.0 + STOCHASTIC_TOL {
                return Err(Error::validation(format!(
                    "node {i}: need alpha, gamma >= 0 and alpha + gamma <= 1 (got {a}, {g})"
                )));
            }
        }
        self.alpha = Some(alpha);
        self.gamma = gamma;
        Ok(self)
    }

    pub fn with_media_reluctance(mut self, media: f64, reluctance: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&media) || !(0.0..=1.0).contains(&reluctance) {
            return Err(Error::validation("media and reluctance factors must lie in [0, 1]"));
        }
        self.media = media;
        self.reluctance = reluctance;
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_raw {
            return Err(Error::validation("label table length must equal node count"));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n_raw(&self) -> usize {
        self.n_raw
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges leaving `i`, sorted by destination.
    pub fn out_edges(&self, i: usize) -> &[Edge] {
        &self.edges[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_raw];
        for e in &self.edges {
            deg[e.dst] += 1;
        }
        deg
    }

    /// Looks up an edge weight, `None` if the edge is absent.
    pub fn weight(&self, src: usize, dst: usize) -> Option<f64> {
        let out = self.out_edges(src);
        out.binary_search_by_key(&dst, |e| e.dst)
            .ok()
            .map(|k| out[k].weight)
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn media(&self) -> f64 {
        self.media
    }

    pub fn reluctance(&self) -> f64 {
        self.reluctance
    }

    pub fn alpha(&self) -> &[f64] {
        self.alpha.as_deref().unwrap_or(&self.beta)
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of node `i`, falling back to its index.
    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => i.to_string(),
        }
    }

    /// Replaces every weight, keeping the edge structure.
    pub(crate) fn map_weights(&mut self, mut f: impl FnMut(usize, &Edge) -> f64) {
        for (k, e) in self.edges.iter_mut().enumerate() {
            let w = f(k, e);
            e.weight = w;
        }
    }

    /// Rescales each node's outgoing weights to sum to one (dangling nodes untouched).
    pub(crate) fn normalize_rows(&mut self) {
        for i in 0..self.n_raw {
            let span = self.offsets[i]..self.offsets[i + 1];
            let total: f64 = self.edges[span.clone()].iter().map(|e| e.weight).sum();
            if total > 0.0 {
                for e in &mut self.edges[span] {
                    e.weight /= total;
                }
            }
        }
    }

    /// Applies one of the load-time weighting schemes to the existing edges.
    pub fn reweighted(mut self, weighting: Weighting, seed: u64) -> Self {
        match weighting {
            Weighting::Explicit => {}
            Weighting::UniformRandom => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                self.map_weights(|_, _| rng.random::<f64>());
                self.normalize_rows();
            }
            Weighting::InverseOutDegree => {
                let deg: Vec<usize> = (0..self.n_raw).map(|i| self.out_degree(i)).collect();
                self.map_weights(|_, e| 1.0 / deg[e.src] as f64);
            }
            Weighting::WeightedCascade => {
                let deg = self.in_degrees();
                self.map_weights(|_, e| 1.0 / deg[e.dst] as f64);
            }
        }
        self
    }
}

/// Parses edge-list text. See [`load_edge_list`].
pub fn parse_edge_list<'a>(text: &'a str, weighting: Weighting, seed: u64) -> Result<Network> {
    struct Row<'t> {
        line: usize,
        src: &'t str,
        dst: &'t str,
        weight: Option<f64>,
    }

    let mut rows = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let weight = match (tokens.len(), weighting) {
            (2, Weighting::Explicit) => {
                return Err(Error::Parse {
                    line,
                    message: "explicit weighting requires a weight column".into(),
                })
            }
            (2, _) => None,
            (3, _) => Some(tokens[2].parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("cannot parse weight `{}`", tokens[2]),
            })?),
            (n, _) => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected `src dst [weight]`, found {n} fields"),
                })
            }
        };
        if let Some(w) = weight {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::validation(format!(
                    "line {line}: edge weight {w} must be finite and nonnegative"
                )));
            }
        }
        if tokens[0] == tokens[1] {
            return Err(Error::validation(format!(
                "line {line}: self-loop on `{}`",
                tokens[0]
            )));
        }
        rows.push(Row {
            line,
            src: tokens[0],
            dst: tokens[1],
            weight,
        });
    }

    // Purely numeric files keep their indices; anything else is relabeled
    // densely in order of first appearance.
    let numeric = rows
        .iter()
        .all(|r| r.src.parse::<usize>().is_ok() && r.dst.parse::<usize>().is_ok());
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut endpoints = Vec::with_capacity(rows.len());
    for r in &rows {
        let mut resolve = |tok: &'a str| -> usize {
            if numeric {
                return tok.parse().unwrap();
            }
            let next = labels.len();
            *index.entry(tok).or_insert_with(|| {
                labels.push(tok.to_string());
                next
            })
        };
        endpoints.push((resolve(r.src), resolve(r.dst)));
    }

    let mut edges = Vec::with_capacity(rows.len());
    let mut seen = HashSet::with_capacity(rows.len());
    let mut n_raw = 0usize;
    for (r, &(s, d)) in rows.iter().zip(&endpoints) {
        if s == d {
            return Err(Error::validation(format!("line {}: self-loop on node {s}", r.line)));
        }
        if !seen.insert((s, d)) {
            return Err(Error::validation(format!(
                "line {}: duplicate edge {} -> {}",
                r.line, r.src, r.dst
            )));
        }
        n_raw = n_raw.max(s + 1).max(d + 1);
        edges.push(Edge::new(s, d, r.weight.unwrap_or(1.0)));
    }
    let net = Network::new(n_raw, edges)?.reweighted(weighting, seed);
    if numeric {
        Ok(net)
    } else {
        net.with_labels(labels)
    }
}

/// Reads a `src dst [weight]` edge list (tab or space separated, `#` comments).
pub fn load_edge_list(path: impl AsRef<Path>, weighting: Weighting, seed: u64) -> Result<Network> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, weighting, seed)
}

/// Tab-separated `src dst weight` lines. Weights use the shortest exact
/// decimal form, so reloading with [`Weighting::Explicit`] reproduces them bit for bit.
pub fn edge_list_string(net: &Network) -> String {
    let mut out = String::with_capacity(net.edge_count() * 16);
    for e in net.edges() {
        let _ = writeln!(out, "{}\t{}\t{}", e.src, e.dst, e.weight);
    }
    out
}

pub fn write_edge_list(net: &Network, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, edge_list_string(net)).map_err(|e| Error::io(path, e))
}

/// Writes the `index label` sidecar table.
pub fn write_label_table(net: &Network, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for i in 0..net.n_raw() {
        let _ = writeln!(out, "{i}\t{}", net.label(i));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads per-node bias strengths from `index beta` lines.
pub fn load_beta_file(path: impl AsRef<Path>, n_raw: usize) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut beta = vec![DEFAULT_BETA; n_raw];
    for (k, raw) in text.lines().enumerate() {
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            line: k + 1,
            message,
        };
        let mut it = t.split_whitespace();
        let (Some(i), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(parse_err("expected `index beta`".into()));
        };
        let i: usize = i.parse().map_err(|_| parse_err(format!("bad index `{i}`")))?;
        let b: f64 = b.parse().map_err(|_| parse_err(format!("bad beta `{b}`")))?;
        if i >= n_raw {
            return Err(parse_err(format!("node {i} out of range")));
        }
        beta[i] = b;
    }
    Ok(beta)
}

/// Network plus the bias node `n_raw`, with row-stochastic transitions.
#[derive(Debug, Clone)]
pub struct AugmentedNetwork {
    network: Network,
    bias_value: f64,
    /// Normalized trust weights; every row sums to one or is empty.
    social: CsrMatrix,
    /// `(1 - beta_i) * social`, the node-to-node part of `P`.
    transition: CsrMatrix,
    /// `P[i, bias]`.
    bias_weight: Vec<f64>,
}

/// Normalizes trust weights, scales them by `1 - beta_i`, and appends the bias
/// edge of weight `beta_i`. Nodes without outgoing weight send everything to the bias node.
pub fn augment_with_bias(net: &Network, b: f64) -> Result<AugmentedNetwork> {
    if !(0.0..=1.0).contains(&b) {
        return Err(Error::validation(format!("bias value {b} must lie in [0, 1]")));
    }
    let n_raw = net.n_raw();
    let mut social = Vec::with_capacity(net.edge_count());
    let mut transition = Vec::with_capacity(net.edge_count());
    let mut bias_weight = vec![1.0; n_raw];
    for (i, bw) in bias_weight.iter_mut().enumerate() {
        let out = net.out_edges(i);
        let total: f64 = out.iter().map(|e| e.weight).sum();
        if total <= 0.0 {
            continue;
        }
        let beta = net.beta()[i];
        for e in out.iter().filter(|e| e.weight > 0.0) {
            let w = e.weight / total;
            social.push((i, e.dst, w));
            transition.push((i, e.dst, (1.0 - beta) * w));
        }
        *bw = beta;
    }
    Ok(AugmentedNetwork {
        network: net.clone(),
        bias_value: b,
        social: CsrMatrix::from_triplets(n_raw, n_raw, social),
        transition: CsrMatrix::from_triplets(n_raw, n_raw, transition),
        bias_weight,
    })
}

impl AugmentedNetwork {
    /// Total node count including the bias node.
    pub fn n(&self) -> usize {
        self.network.n_raw() + 1
    }

    pub fn n_raw(&self) -> usize {
        self.network.n_raw()
    }

    pub fn bias_index(&self) -> usize {
        self.network.n_raw()
    }

    pub fn bias_value(&self) -> f64 {
        self.bias_value
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn social(&self) -> &CsrMatrix {
        &self.social
    }

    /// Node-to-node block of `P` (`n_raw x n_raw`).
    pub fn transition(&self) -> &CsrMatrix {
        &self.transition
    }

    pub fn bias_weights(&self) -> &[f64] {
        &self.bias_weight
    }

    /// Row `i` of `P` as `(column, weight)`, bias column last.
    pub fn transition_row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let bias = (self.bias_weight[i] > 0.0).then_some((self.bias_index(), self.bias_weight[i]));
        self.transition.row_entries(i).chain(bias)
    }

    /// Whether node `i` has no outgoing trust weight.
    pub fn is_dangling(&self, i: usize) -> bool {
        self.social.row(i).0.is_empty()
    }

    pub fn max_row_sum_error(&self) -> f64 {
        (0..self.n_raw())
            .map(|i| (self.transition.row_sum(i) + self.bias_weight[i] - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Ordered set of distinct seed nodes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SeedSet {
    members: Vec<usize>,
}

impl SeedSet {
    pub fn new(members: Vec<usize>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(members.len());
        if let Some(dup) = members.iter().find(|m| !seen.insert(**m)) {
            return Err(Error::validation(format!("seed {dup} listed twice")));
        }
        Ok(Self { members })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.members.contains(&node)
    }

    /// This set with `node` appended.
    pub fn with(&self, node: usize) -> Result<Self> {
        if self.contains(node) {
            return Err(Error::validation(format!("node {node} is already a seed")));
        }
        let mut members = self.members.clone();
        members.push(node);
        Ok(Self { members })
    }

    /// The first `k` members.
    pub fn prefix(&self, k: usize) -> Self {
        Self {
            members: self.members[..k.min(self.members.len())].to_vec(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }
}

impl From<SeedSet> for Vec<usize> {
    fn from(s: SeedSet) -> Self {
        s.members
    }
}

/// `P` partitioned for one seed set: boundary rows (seeds and bias) are
/// identity rows, interior rows split into the `R` and `B` blocks.
#[derive(Debug, Clone)]
pub struct TransitionSystem {
    n: usize,
    bias_value: f64,
    seeds: SeedSet,
    interior: Vec<usize>,
    boundary: Vec<usize>,
    interior_pos: Vec<Option<usize>>,
    boundary_pos: Vec<Option<usize>>,
    r: CsrMatrix,
    b: CsrMatrix,
}

pub fn build_transition_system(aug: &AugmentedNetwork, seeds: &SeedSet) -> Result<TransitionSystem> {
    let n = aug.n();
    let n_raw = aug.n_raw();
    let bias = aug.bias_index();
    let mut is_boundary = vec![false; n];
    for s in seeds.iter() {
        if s == bias {
            return Err(Error::validation(format!("node {s} is the bias node and cannot be a seed")));
        }
        if s >= n_raw {
            return Err(Error::validation(format!("seed {s} is outside 0..{n_raw}")));
        }
        is_boundary[s] = true;
    }
    is_boundary[bias] = true;

    let mut interior = Vec::with_capacity(n_raw - seeds.len());
    let mut boundary = Vec::with_capacity(seeds.len() + 1);
    let mut interior_pos = vec![None; n];
    let mut boundary_pos = vec![None; n];
    for (v, &is_b) in is_boundary.iter().enumerate() {
        if is_b {
            boundary_pos[v] = Some(boundary.len());
            boundary.push(v);
        } else {
            interior_pos[v] = Some(interior.len());
            interior.push(v);
        }
    }

    let mut r = Vec::new();
    let mut b = Vec::new();
    for (pi, &i) in interior.iter().enumerate() {
        for (j, w) in aug.transition_row(i) {
            match interior_pos[j] {
                Some(pj) => r.push((pi, pj, w)),
                None => b.push((pi, boundary_pos[j].unwrap(), w)),
            }
        }
    }
    let (ni, nb) = (interior.len(), boundary.len());
    Ok(TransitionSystem {
        n,
        bias_value: aug.bias_value(),
        seeds: seeds.clone(),
        interior,
        boundary,
        interior_pos,
        boundary_pos,
        r: CsrMatrix::from_triplets(ni, ni, r),
        b: CsrMatrix::from_triplets(ni, nb, b),
    })
}

impl TransitionSystem {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bias_index(&self) -> usize {
        self.n - 1
    }

    pub fn bias_value(&self) -> f64 {
        self.bias_value
    }

    pub fn seeds(&self) -> &SeedSet {
        &self.seeds
    }

    /// Interior nodes in ascending global order.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// Boundary nodes in ascending global order; the bias node is last.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn interior_position(&self, node: usize) -> Option<usize> {
        self.interior_pos.get(node).copied().flatten()
    }

    pub fn boundary_position(&self, node: usize) -> Option<usize> {
        self.boundary_pos.get(node).copied().flatten()
    }

    /// Interior-to-interior block.
    pub fn r(&self) -> &CsrMatrix {
        &self.r
    }

    /// Interior-to-boundary block, columns in [`Self::boundary`] order.
    pub fn b_block(&self) -> &CsrMatrix {
        &self.b
    }

    /// Boundary data: 1 at seeds and `b` at the bias node.
    pub fn boundary_values(&self, b: f64) -> Vec<f64> {
        self.boundary
            .iter()
            .map(|&v| if v == self.bias_index() { b } else { 1.0 })
            .collect()
    }

    /// Row `node` of the full matrix `P` as `(column, weight)`.
    pub fn p_row(&self, node: usize) -> Vec<(usize, f64)> {
        match self.interior_position(node) {
            None => vec![(node, 1.0)],
            Some(pi) => {
                let mut row: Vec<(usize, f64)> = self
                    .r
                    .row_entries(pi)
                    .map(|(pj, w)| (self.interior[pj], w))
                    .chain(self.b.row_entries(pi).map(|(pb, w)| (self.boundary[pb], w)))
                    .collect();
                row.sort_by_key(|&(j, _)| j);
                row
            }
        }
    }

    /// `P u` over all `n` nodes. Boundary rows reproduce their input value.
    pub fn apply_p(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.n);
        let mut out = u.to_vec();
        for (pi, &i) in self.interior.iter().enumerate() {
            let social: f64 = self.r.row_entries(pi).map(|(pj, w)| w * u[self.interior[pj]]).sum();
            let edge: f64 = self.b.row_entries(pi).map(|(pb, w)| w * u[self.boundary[pb]]).sum();
            out[i] = social + edge;
        }
        out
    }

    /// `L u = (I - P) u`.
    pub fn apply_laplacian(&self, u: &[f64]) -> Vec<f64> {
        let pu = self.apply_p(u);
        u.iter().zip(pu).map(|(a, b)| a - b).collect()
    }

    /// Dense copy of `P`, for tests and tiny systems.
    pub fn p_dense(&self) -> Vec<Vec<f64>> {
        let mut p = vec![vec![0.0; self.n]; self.n];
        for (i, row) in p.iter_mut().enumerate() {
            for (j, w) in self.p_row(i) {
                row[j] += w;
            }
        }
        p
    }

    pub fn max_row_sum_error(&self) -> f64 {
        (0..self.interior.len())
            .map(|pi| (self.r.row_sum(pi) + self.b.row_sum(pi) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Smallest interior node with no path to the boundary, if any.
    pub fn trapped_node(&self) -> Option<usize> {
        let ni = self.interior.len();
        let mut reaches = vec![false; ni];
        let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); ni];
        let mut stack = Vec::new();
        for pi in 0..ni {
            for (pj, _) in self.r.row_entries(pi) {
                incoming[pj].push(pi);
            }
            if self.b.row_sum(pi) > 0.0 {
                reaches[pi] = true;
                stack.push(pi);
            }
        }
        while let Some(pj) = stack.pop() {
            for &pi in &incoming[pj] {
                if !reaches[pi] {
                    reaches[pi] = true;
                    stack.push(pi);
                }
            }
        }
        reaches.iter().position(|r| !r).map(|pi| self.interior[pi])
    }
}
