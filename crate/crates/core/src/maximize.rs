//! Seed selection: closed-form greedy, Monte Carlo greedy variants, brute
//! force, structural baselines and data-dependent quality bounds.
//!
//! With `b = 0`, adding interior node `s` to seed set `S` raises the spread by
//!
//! ```text
//! gain(s) = (1 - v(s)) * sum_i F[i][s] / F[s][s]
//! ```
//!
//! where `v` is the steady state under `S` and `F` its fundamental matrix.
//! [`c2greedy`] scores every candidate this way from one `F` per step.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_transition_system, AugmentedNetwork, SeedSet};
use crate::simulate::{ModelMode, MonteCarlo};
use crate::spread::{
    compute_fundamental_dense, compute_fundamental_neumann, influence_spread, steady_state_iterative,
    steady_state_with, Backend, FundamentalMatrix,
};

/// Relative tolerance under which two scores count as tied; ties go to the
/// lowest node index.
pub const TIE_TOL: f64 = 1e-9;

/// Default limit on the number of subsets [`brute_force`] may enumerate.
pub const DEFAULT_BRUTE_FORCE_CAP: u64 = 1_000_000;

pub const PAGERANK_DAMPING: f64 = 0.85;
pub const PAGERANK_TOL: f64 = 1e-10;

const ITERATIVE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyStep {
    pub seed: usize,
    pub marginal_gain: f64,
    pub sigma_after: f64,
    pub elapsed: Duration,
    /// Spread (or gain-vector) evaluations spent on this step.
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyTrace {
    pub algorithm: String,
    pub backend: String,
    pub steps: Vec<GreedyStep>,
}

impl GreedyTrace {
    fn new(algorithm: impl Into<String>, backend: impl Into<String>) -> Self {
        Self {
            algorithm: algorithm.into(),
            backend: backend.into(),
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Selected seeds in selection order.
    pub fn seeds(&self) -> SeedSet {
        SeedSet::new(self.steps.iter().map(|s| s.seed).collect()).expect("greedy seeds are distinct")
    }

    pub fn sigma(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.sigma_after)
    }

    pub fn total_elapsed(&self) -> Duration {
        self.steps.iter().map(|s| s.elapsed).sum()
    }

    pub fn total_evaluations(&self) -> u64 {
        self.steps.iter().map(|s| s.evaluations).sum()
    }
}

/// Index of the best score; scores within [`TIE_TOL`] of the best go to the
/// lowest index.
pub fn argmax_lowest(scores: &[(usize, f64)]) -> Option<(usize, f64)> {
    let best = scores.iter().map(|&(_, s)| s).fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return scores.first().copied();
    }
    let floor = best - TIE_TOL * best.abs().max(1.0);
    scores
        .iter()
        .filter(|&&(_, s)| s >= floor)
        .min_by_key(|&&(i, _)| i)
        .copied()
}

/// Incremental state of the closed-form greedy selector.
///
/// Step 1 builds `F` for the empty seed set. Each later step first folds the
/// previous seed into `F` (a rank-1 update on the dense backend, a fresh
/// truncated series on the Neumann backend), then scores all candidates.
pub struct C2Greedy<'a> {
    aug: &'a AugmentedNetwork,
    backend: Backend,
    f: Option<FundamentalMatrix>,
    pending: Option<usize>,
    v: Vec<f64>,
    seeds: SeedSet,
    sigma: f64,
}

impl<'a> C2Greedy<'a> {
    pub fn new(aug: &'a AugmentedNetwork, backend: Backend) -> Self {
        Self {
            aug,
            backend: backend.resolve(aug),
            f: None,
            pending: None,
            v: vec![0.0; aug.n()],
            seeds: SeedSet::empty(),
            sigma: 0.0,
        }
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// Steady-state adoption probabilities under the seeds chosen so far, bias last (value 0).
    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn seeds(&self) -> &SeedSet {
        &self.seeds
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn refresh(&mut self) -> Result<()> {
        match self.backend {
            Backend::Neumann { terms } => {
                let ts = build_transition_system(self.aug, &self.seeds)?;
                self.f = Some(compute_fundamental_neumann(&ts, terms));
            }
            _ => match (&mut self.f, self.pending.take()) {
                (Some(f), Some(s)) => f.absorb(s)?,
                (None, _) => {
                    let ts = build_transition_system(self.aug, &self.seeds)?;
                    self.f = Some(compute_fundamental_dense(&ts)?);
                }
                (Some(_), None) => {}
            },
        }
        Ok(())
    }

    /// `gain(s)` for every current interior node, in interior order.
    fn scores(&self) -> Vec<(usize, f64)> {
        let f = self.f.as_ref().expect("refreshed");
        f.interior()
            .par_iter()
            .map(|&i| {
                let ratio = f.normalized_column_sum(i).expect("interior node");
                (i, (1.0 - self.v[i]) * ratio)
            })
            .collect()
    }

    /// Selects one more seed.
    pub fn step(&mut self) -> Result<GreedyStep> {
        let start = Instant::now();
        if self.seeds.len() == self.aug.n_raw() {
            return Err(Error::validation("every node is already a seed"));
        }
        self.refresh()?;
        let (s, gain) = argmax_lowest(&self.scores()).expect("nonempty interior");
        let f = self.f.as_ref().unwrap();
        let factor = (1.0 - self.v[s]) / f.diagonal(s)?;
        for (&i, x) in f.interior().iter().zip(f.column(s)?) {
            self.v[i] = (self.v[i] + factor * x).clamp(0.0, 1.0);
        }
        self.v[s] = 1.0;
        self.seeds = self.seeds.with(s)?;
        self.sigma += gain;
        self.pending = Some(s);
        Ok(GreedyStep {
            seed: s,
            marginal_gain: gain,
            sigma_after: self.sigma,
            elapsed: start.elapsed(),
            evaluations: 1,
        })
    }
}

/// The single most influential node: argmax of `sum_i F[i][s] / F[s][s]` with no seeds.
pub fn most_influential(aug: &AugmentedNetwork, backend: Backend) -> Result<usize> {
    Ok(C2Greedy::new(aug, backend).step()?.seed)
}

fn check_k(aug: &AugmentedNetwork, k: usize) -> Result<()> {
    if k > aug.n_raw() {
        return Err(Error::validation(format!("K = {k} exceeds the {} nodes", aug.n_raw())));
    }
    Ok(())
}

/// Greedy selection of `k` seeds with closed-form spread and closed-form gains.
pub fn c2greedy(aug: &AugmentedNetwork, k: usize, backend: Backend) -> Result<GreedyTrace> {
    check_k(aug, k)?;
    let mut sel = C2Greedy::new(aug, backend);
    let mut trace = GreedyTrace::new("c2greedy", sel.backend().to_string());
    for _ in 0..k {
        trace.steps.push(sel.step()?);
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McVariant {
    /// Monte Carlo spread, every candidate re-evaluated each step.
    Plain,
    /// Monte Carlo spread with lazy (CELF) re-evaluation.
    Lazy,
    /// Exact closed-form spread per candidate, every candidate each step.
    C1,
    LazyC1,
}

impl McVariant {
    fn algorithm(self) -> Algorithm {
        match self {
            McVariant::Plain => Algorithm::Greedy,
            McVariant::Lazy => Algorithm::LazyGreedy,
            McVariant::C1 => Algorithm::C1Greedy,
            McVariant::LazyC1 => Algorithm::LazyC1Greedy,
        }
    }

    fn is_lazy(self) -> bool {
        matches!(self, McVariant::Lazy | McVariant::LazyC1)
    }
}

/// Monte Carlo settings for spread estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McParams {
    pub runs: usize,
    pub horizon: usize,
    pub rng_seed: u64,
}

/// Evaluates spread of whole seed sets for the evaluation-based greedy variants.
enum Oracle<'a> {
    Mc(MonteCarlo<'a>),
    /// Warm-started iterative solve from the current seed set's steady state.
    Closed { aug: &'a AugmentedNetwork, warm: Vec<f64> },
}

impl Oracle<'_> {
    fn spread(&self, seeds: &SeedSet) -> Result<f64> {
        match self {
            Oracle::Mc(mc) => Ok(mc.spread(seeds)?.mean),
            Oracle::Closed { aug, warm } => Ok(steady_state_iterative(aug, seeds, Some(warm), ITERATIVE_TOL)?.sigma),
        }
    }

    fn commit(&mut self, seeds: &SeedSet) -> Result<()> {
        if let Oracle::Closed { aug, warm } = self {
            *warm = steady_state_iterative(aug, seeds, Some(warm), ITERATIVE_TOL)?.v;
        }
        Ok(())
    }
}

#[derive(Debug, PartialEq)]
struct Stale {
    gain: f64,
    node: usize,
    round: usize,
}

impl Eq for Stale {}

impl Ord for Stale {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain.total_cmp(&other.gain).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Stale {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Greedy selection that evaluates the spread of `S ∪ {s}` per candidate,
/// by Monte Carlo (`Plain`, `Lazy`) or by an exact closed-form solve (`C1`, `LazyC1`).
pub fn mc_greedy(aug: &AugmentedNetwork, k: usize, variant: McVariant, mc: &McParams) -> Result<GreedyTrace> {
    Ok(mc_greedy_run(aug, k, variant, mc, None)?.trace)
}

/// A greedy run that may have been cut short by a time budget.
#[derive(Debug, Clone)]
pub struct BudgetedRun {
    /// Completed steps only.
    pub trace: GreedyTrace,
    /// Spread evaluations, including those of an unfinished step.
    pub evaluations: u64,
    pub elapsed: Duration,
    pub complete: bool,
}

/// [`mc_greedy`] that stops once `budget` has elapsed. The budget is
/// checked between rounds and between batches of candidate evaluations.
pub fn mc_greedy_within(
    aug: &AugmentedNetwork,
    k: usize,
    variant: McVariant,
    mc: &McParams,
    budget: Duration,
) -> Result<BudgetedRun> {
    mc_greedy_run(aug, k, variant, mc, Some(budget))
}

/// Candidates scored between budget checks.
const BATCH: usize = 64;

fn mc_greedy_run(
    aug: &AugmentedNetwork,
    k: usize,
    variant: McVariant,
    mc: &McParams,
    budget: Option<Duration>,
) -> Result<BudgetedRun> {
    check_k(aug, k)?;
    let (mut oracle, backend) = match variant {
        McVariant::Plain | McVariant::Lazy => {
            if mc.horizon == 0 {
                return Err(Error::validation("Monte Carlo greedy needs a horizon of at least 1"));
            }
            let engine = MonteCarlo::new(aug, ModelMode::Hc, mc.horizon, mc.runs, mc.rng_seed)?;
            (Oracle::Mc(engine), "monte_carlo")
        }
        McVariant::C1 | McVariant::LazyC1 => (
            Oracle::Closed {
                aug,
                warm: vec![0.0; aug.n()],
            },
            "closed_form",
        ),
    };
    let clock = Instant::now();
    let over = || budget.is_some_and(|b| clock.elapsed() >= b);
    let mut trace = GreedyTrace::new(variant.algorithm().to_string(), backend);
    let mut seeds = SeedSet::empty();
    let mut sigma = 0.0;
    let mut heap = BinaryHeap::new();
    let mut total = 0u64;
    let stopped = |trace: GreedyTrace, total| BudgetedRun {
        trace,
        evaluations: total,
        elapsed: clock.elapsed(),
        complete: false,
    };

    for round in 0..k {
        if round > 0 && over() {
            return Ok(stopped(trace, total));
        }
        let start = Instant::now();
        let (node, value, evaluations) = if round == 0 || !variant.is_lazy() {
            let candidates: Vec<usize> = (0..aug.n_raw()).filter(|&i| !seeds.contains(i)).collect();
            let mut values = Vec::with_capacity(candidates.len());
            for batch in candidates.chunks(BATCH) {
                let scored = batch
                    .par_iter()
                    .map(|&c| Ok((c, oracle.spread(&seeds.with(c)?)?)))
                    .collect::<Result<Vec<(usize, f64)>>>()?;
                total += scored.len() as u64;
                values.extend(scored);
                if values.len() < candidates.len() && over() {
                    return Ok(stopped(trace, total));
                }
            }
            if variant.is_lazy() {
                heap.extend(values.iter().map(|&(node, v)| Stale {
                    gain: v - sigma,
                    node,
                    round,
                }));
                let top = heap.pop().expect("candidates");
                (top.node, sigma + top.gain, values.len() as u64)
            } else {
                let (node, value) = argmax_lowest(&values).expect("candidates");
                (node, value, values.len() as u64)
            }
        } else {
            let mut evaluations = 0;
            loop {
                let top = heap.pop().expect("candidates");
                if top.round == round {
                    break (top.node, sigma + top.gain, evaluations);
                }
                let v = oracle.spread(&seeds.with(top.node)?)?;
                evaluations += 1;
                total += 1;
                heap.push(Stale {
                    gain: v - sigma,
                    node: top.node,
                    round,
                });
                if over() {
                    return Ok(stopped(trace, total));
                }
            }
        };
        seeds = seeds.with(node)?;
        oracle.commit(&seeds)?;
        trace.steps.push(GreedyStep {
            seed: node,
            marginal_gain: value - sigma,
            sigma_after: value,
            elapsed: start.elapsed(),
            evaluations,
        });
        sigma = value;
    }
    Ok(BudgetedRun {
        trace,
        evaluations: total,
        elapsed: clock.elapsed(),
        complete: true,
    })
}

/// Advances `idx` to the next subset of the same size below `n`, lexicographically.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for p in (0..k).rev() {
        if idx[p] < n - (k - p) {
            idx[p] += 1;
            for q in p + 1..k {
                idx[q] = idx[q - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `C(n, k)`, saturating at `u64::MAX`.
pub fn binomial_count(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    binomial(n as u64, k as u64).min(u64::MAX as u128) as u64
}

fn improves(candidate: f64, best: f64) -> bool {
    candidate > best + TIE_TOL * best.abs().max(1.0)
}

/// Exhaustive optimum over all `k`-subsets, closed-form spread. Ties within
/// [`TIE_TOL`] go to the lexicographically first subset.
pub fn brute_force(aug: &AugmentedNetwork, k: usize, cap: u64) -> Result<(SeedSet, f64)> {
    check_k(aug, k)?;
    let n = aug.n_raw();
    let count = binomial(n as u64, k as u64);
    if count > cap as u128 {
        return Err(Error::Capacity(format!(
            "brute force over C({n}, {k}) = {count} subsets exceeds the cap of {cap}; use a smaller K or network"
        )));
    }
    let eval = |members: Vec<usize>| -> Result<(SeedSet, f64)> {
        let set = SeedSet::new(members)?;
        let sigma = influence_spread(aug, &set, Backend::Dense)?;
        Ok((set, sigma))
    };
    if k == 0 {
        return eval(Vec::new());
    }
    let per_first = (0..=n - k)
        .into_par_iter()
        .map(|first| {
            let mut rest: Vec<usize> = (first + 1..first + k).collect();
            let mut best: Option<(SeedSet, f64)> = None;
            loop {
                let mut members = Vec::with_capacity(k);
                members.push(first);
                members.extend_from_slice(&rest);
                let (set, sigma) = eval(members)?;
                if best.as_ref().is_none_or(|(_, b)| improves(sigma, *b)) {
                    best = Some((set, sigma));
                }
                if rest.is_empty() || !next_combination(&mut rest, n) {
                    break;
                }
            }
            Ok(best.expect("at least one subset"))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<(SeedSet, f64)> = None;
    for (set, sigma) in per_first {
        if best.as_ref().is_none_or(|(_, b)| improves(sigma, *b)) {
            best = Some((set, sigma));
        }
    }
    Ok(best.expect("at least one subset"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub online_bound: f64,
    pub offline_bound: f64,
    pub achieved_sigma: f64,
    pub ratio: f64,
}

/// Closed-form gain of every non-seed node given `seeds`, ascending by node.
pub fn marginal_gains(aug: &AugmentedNetwork, seeds: &SeedSet, backend: Backend) -> Result<Vec<(usize, f64)>> {
    let backend = backend.resolve(aug);
    let ts = build_transition_system(aug, seeds)?;
    let f = match backend {
        Backend::Neumann { terms } => compute_fundamental_neumann(&ts, terms),
        _ => compute_fundamental_dense(&ts)?,
    };
    let v = steady_state_with(aug, seeds, backend)?.v;
    f.interior()
        .iter()
        .map(|&i| Ok((i, (1.0 - v[i]) * f.normalized_column_sum(i)?)))
        .collect()
}

fn top_sum(mut gains: Vec<f64>, k: usize) -> f64 {
    gains.sort_unstable_by(|a, b| b.total_cmp(a));
    gains.iter().take(k).sum()
}

/// Online bound `sigma(S) + sum of the |S| largest gains at S` and offline
/// bound `sum of the |S| largest gains at the empty set`.
pub fn online_bound(aug: &AugmentedNetwork, trace: &GreedyTrace, backend: Backend) -> Result<BoundReport> {
    let seeds = trace.seeds();
    let k = seeds.len();
    let achieved = influence_spread(aug, &seeds, backend)?;
    let at_s = marginal_gains(aug, &seeds, backend)?;
    let at_empty = marginal_gains(aug, &SeedSet::empty(), backend)?;
    let online = achieved + top_sum(at_s.into_iter().map(|(_, g)| g).collect(), k);
    let offline = top_sum(at_empty.into_iter().map(|(_, g)| g).collect(), k);
    Ok(BoundReport {
        online_bound: online,
        offline_bound: offline,
        achieved_sigma: achieved,
        ratio: if online > 0.0 { achieved / online } else { 1.0 },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    Degree,
    PageRank,
    Random,
}

/// `sum_i w_ij` over the followers `i` of each node `j`, with normalized weights.
pub fn weighted_in_degree(aug: &AugmentedNetwork) -> Vec<f64> {
    let mut deg = vec![0.0; aug.n_raw()];
    for i in 0..aug.n_raw() {
        for (j, w) in aug.social().row_entries(i) {
            deg[j] += w;
        }
    }
    deg
}

/// PageRank with rank flowing from followers to the nodes they follow.
/// Nodes that follow nobody spread their rank uniformly.
pub fn pagerank(aug: &AugmentedNetwork, damping: f64, tol: f64) -> Vec<f64> {
    let n = aug.n_raw();
    if n == 0 {
        return Vec::new();
    }
    let social = aug.social();
    let mut p = vec![1.0 / n as f64; n];
    for _ in 0..10_000 {
        let mut next = vec![0.0; n];
        let mut dangling = 0.0;
        for (i, &pi) in p.iter().enumerate() {
            let (cols, vals) = social.row(i);
            if cols.is_empty() {
                dangling += pi;
            }
            for (&j, &w) in cols.iter().zip(vals) {
                next[j] += damping * pi * w;
            }
        }
        let base = (1.0 - damping + damping * dangling) / n as f64;
        next.iter_mut().for_each(|x| *x += base);
        let diff: f64 = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        p = next;
        if diff < tol {
            break;
        }
    }
    p
}

/// The `k` best-scoring nodes, best first, ties to the lowest index.
fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut remaining: Vec<(usize, f64)> = scores.iter().copied().enumerate().collect();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let (node, _) = argmax_lowest(&remaining).expect("k <= n");
        out.push(node);
        remaining.retain(|&(i, _)| i != node);
    }
    out
}

pub fn baseline_select(aug: &AugmentedNetwork, k: usize, method: Baseline, rng_seed: u64) -> Result<SeedSet> {
    check_k(aug, k)?;
    let members = match method {
        Baseline::Degree => top_k(&weighted_in_degree(aug), k),
        Baseline::PageRank => top_k(&pagerank(aug, PAGERANK_DAMPING, PAGERANK_TOL), k),
        Baseline::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            rand::seq::index::sample(&mut rng, aug.n_raw(), k).into_vec()
        }
    };
    SeedSet::new(members)
}

/// Trace of a fixed seed order: closed-form spread of every prefix.
pub fn trace_from_seeds(
    aug: &AugmentedNetwork,
    seeds: &SeedSet,
    algorithm: &str,
    backend: Backend,
    selection_time: Duration,
) -> Result<GreedyTrace> {
    let mut trace = GreedyTrace::new(algorithm, backend.resolve(aug).to_string());
    let mut prev = 0.0;
    for k in 1..=seeds.len() {
        let sigma = influence_spread(aug, &seeds.prefix(k), backend)?;
        trace.steps.push(GreedyStep {
            seed: seeds.members()[k - 1],
            marginal_gain: sigma - prev,
            sigma_after: sigma,
            elapsed: if k == 1 { selection_time } else { Duration::ZERO },
            evaluations: 0,
        });
        prev = sigma;
    }
    Ok(trace)
}

/// Every selector behind one name, as used by the experiment runner and CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "c2greedy")]
    C2Greedy,
    #[serde(rename = "greedy")]
    Greedy,
    #[serde(rename = "lazy_greedy")]
    LazyGreedy,
    #[serde(rename = "c1greedy")]
    C1Greedy,
    #[serde(rename = "lazy_c1greedy")]
    LazyC1Greedy,
    #[serde(rename = "degree")]
    Degree,
    #[serde(rename = "pagerank")]
    PageRank,
    #[serde(rename = "random")]
    Random,
    #[serde(rename = "brute")]
    BruteForce,
}

impl Algorithm {
    pub const ALL: [Algorithm; 9] = [
        Algorithm::C2Greedy,
        Algorithm::Greedy,
        Algorithm::LazyGreedy,
        Algorithm::C1Greedy,
        Algorithm::LazyC1Greedy,
        Algorithm::Degree,
        Algorithm::PageRank,
        Algorithm::Random,
        Algorithm::BruteForce,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::C2Greedy => "c2greedy",
            Algorithm::Greedy => "greedy",
            Algorithm::LazyGreedy => "lazy_greedy",
            Algorithm::C1Greedy => "c1greedy",
            Algorithm::LazyC1Greedy => "lazy_c1greedy",
            Algorithm::Degree => "degree",
            Algorithm::PageRank => "pagerank",
            Algorithm::Random => "random",
            Algorithm::BruteForce => "brute",
        }
    }

    /// Whether the seeds for size `k` extend the seeds for size `k - 1`.
    pub fn is_incremental(self) -> bool {
        self != Algorithm::BruteForce
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Algorithm::ALL.iter().map(|a| a.name()).collect();
                Error::Config(format!("unknown algorithm `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectOptions {
    pub backend: Backend,
    pub mc: McParams,
    pub rng_seed: u64,
    pub brute_force_cap: u64,
}

impl Default for SelectOptions {
    fn default() -> Self {
        Self {
            backend: Backend::Auto,
            mc: McParams {
                runs: 100,
                horizon: 50,
                rng_seed: 0,
            },
            rng_seed: 0,
            brute_force_cap: DEFAULT_BRUTE_FORCE_CAP,
        }
    }
}

/// Runs one selector for `k` seeds.
pub fn select(aug: &AugmentedNetwork, k: usize, algorithm: Algorithm, opts: &SelectOptions) -> Result<GreedyTrace> {
    let timed_baseline = |method: Baseline| -> Result<GreedyTrace> {
        let start = Instant::now();
        let seeds = baseline_select(aug, k, method, opts.rng_seed)?;
        trace_from_seeds(aug, &seeds, algorithm.name(), opts.backend, start.elapsed())
    };
    match algorithm {
        Algorithm::C2Greedy => c2greedy(aug, k, opts.backend),
        Algorithm::Greedy => mc_greedy(aug, k, McVariant::Plain, &opts.mc),
        Algorithm::LazyGreedy => mc_greedy(aug, k, McVariant::Lazy, &opts.mc),
        Algorithm::C1Greedy => mc_greedy(aug, k, McVariant::C1, &opts.mc),
        Algorithm::LazyC1Greedy => mc_greedy(aug, k, McVariant::LazyC1, &opts.mc),
        Algorithm::Degree => timed_baseline(Baseline::Degree),
        Algorithm::PageRank => timed_baseline(Baseline::PageRank),
        Algorithm::Random => timed_baseline(Baseline::Random),
        Algorithm::BruteForce => {
            let start = Instant::now();
            let (seeds, _) = brute_force(aug, k, opts.brute_force_cap)?;
            trace_from_seeds(aug, &seeds, algorithm.name(), opts.backend, start.elapsed())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{augment_with_bias, Edge, Network, Weighting};
    use approx::assert_abs_diff_eq;

    fn pair() -> AugmentedNetwork {
        let net = Network::new(2, vec![Edge::new(0, 1, 1.0), Edge::new(1, 0, 1.0)]).unwrap();
        augment_with_bias(&net, 0.0).unwrap()
    }

    /// Leaves 1..5 follow hub 0.
    fn star() -> AugmentedNetwork {
        let edges = (1..5).map(|i| Edge::new(i, 0, 1.0)).collect();
        augment_with_bias(&Network::new(5, edges).unwrap(), 0.0).unwrap()
    }

    fn cycle(n: usize) -> AugmentedNetwork {
        let edges = (0..n).map(|i| Edge::new(i, (i + 1) % n, 1.0)).collect();
        augment_with_bias(&Network::new(n, edges).unwrap(), 0.0).unwrap()
    }

    #[test]
    fn budgeted_run_stops_early_or_matches() {
        let aug = cycle(12);
        let mc = McParams {
            runs: 20,
            horizon: 10,
            rng_seed: 3,
        };
        let cut = mc_greedy_within(&aug, 3, McVariant::C1, &mc, Duration::ZERO).unwrap();
        assert!(!cut.complete);
        assert_eq!(cut.evaluations, 12);
        assert_eq!(cut.trace.steps.len(), 1);
        let full = mc_greedy_within(&aug, 3, McVariant::Plain, &mc, Duration::from_secs(3600)).unwrap();
        assert!(full.complete);
        assert_eq!(full.evaluations, 12 + 11 + 10);
        assert_eq!(full.trace.seeds(), mc_greedy(&aug, 3, McVariant::Plain, &mc).unwrap().seeds());
    }

    #[test]
    fn most_influential_examples() {
        assert_eq!(most_influential(&pair(), Backend::Dense).unwrap(), 0);
        assert_eq!(most_influential(&star(), Backend::Dense).unwrap(), 0);
        let single = augment_with_bias(&Network::new(1, vec![]).unwrap(), 0.0).unwrap();
        assert_eq!(most_influential(&single, Backend::Dense).unwrap(), 0);
    }

    #[test]
    fn c2greedy_on_pair() {
        let trace = c2greedy(&pair(), 2, Backend::Dense).unwrap();
        assert_eq!(trace.seeds().members(), &[0, 1]);
        assert_abs_diff_eq!(trace.steps[0].sigma_after, 1.9, epsilon = 1e-12);
        assert_abs_diff_eq!(trace.steps[1].sigma_after, 2.0, epsilon = 1e-12);
        assert_eq!(trace.total_evaluations(), 2);
        assert!(c2greedy(&pair(), 3, Backend::Dense).is_err());
    }

    #[test]
    fn c1_agrees_with_c2_on_pair() {
        let mc = McParams {
            runs: 1,
            horizon: 1,
            rng_seed: 0,
        };
        for variant in [McVariant::C1, McVariant::LazyC1] {
            let trace = mc_greedy(&pair(), 2, variant, &mc).unwrap();
            assert_eq!(trace.seeds().members(), &[0, 1]);
            assert_abs_diff_eq!(trace.steps[0].sigma_after, 1.9, epsilon = 1e-10);
            assert_abs_diff_eq!(trace.steps[1].sigma_after, 2.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn brute_force_examples() {
        let (set, sigma) = brute_force(&pair(), 1, DEFAULT_BRUTE_FORCE_CAP).unwrap();
        assert_eq!(set.members(), &[0]);
        assert_abs_diff_eq!(sigma, 1.9, epsilon = 1e-12);
        let (set, sigma) = brute_force(&star(), 5, DEFAULT_BRUTE_FORCE_CAP).unwrap();
        assert_eq!(set.len(), 5);
        assert_eq!(sigma, 5.0);
        assert!(matches!(brute_force(&cycle(40), 10, 1000), Err(Error::Capacity(_))));
    }

    #[test]
    fn combinations_are_lexicographic() {
        let mut idx = vec![1, 2];
        let mut seen = vec![idx.clone()];
        while next_combination(&mut idx, 5) {
            seen.push(idx.clone());
        }
        assert_eq!(seen, vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]]);
        assert_eq!(binomial(34, 5), 278_256);
    }

    #[test]
    fn online_bound_on_pair() {
        let trace = c2greedy(&pair(), 1, Backend::Dense).unwrap();
        let report = online_bound(&pair(), &trace, Backend::Dense).unwrap();
        assert_abs_diff_eq!(report.online_bound, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.offline_bound, 1.9, epsilon = 1e-12);
        assert_abs_diff_eq!(report.ratio, 0.95, epsilon = 1e-12);
    }

    #[test]
    fn baselines() {
        assert_eq!(baseline_select(&star(), 1, Baseline::Degree, 0).unwrap().members(), &[0]);
        let ring = cycle(6);
        let pr = pagerank(&ring, PAGERANK_DAMPING, PAGERANK_TOL);
        for p in &pr {
            assert_abs_diff_eq!(*p, 1.0 / 6.0, epsilon = 1e-12);
        }
        assert_eq!(baseline_select(&ring, 2, Baseline::PageRank, 0).unwrap().members(), &[0, 1]);
        let a = baseline_select(&ring, 3, Baseline::Random, 42).unwrap();
        let b = baseline_select(&ring, 3, Baseline::Random, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pagerank_favors_the_followed_hub() {
        let pr = pagerank(&star(), PAGERANK_DAMPING, PAGERANK_TOL);
        assert!(pr[1..].iter().all(|&p| p < pr[0]));
        assert_abs_diff_eq!(pr.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn neumann_c2greedy_matches_dense_on_a_dag() {
        // Follow edges only point to lower indices, so R is nilpotent and a
        // series with n terms is exact.
        let mut edges = Vec::new();
        for i in 1..30usize {
            for j in [i / 2, i / 3, i - 1] {
                if j < i && !edges.iter().any(|e: &Edge| e.src == i && e.dst == j) {
                    edges.push(Edge::new(i, j, 1.0));
                }
            }
        }
        let net = Network::new(30, edges).unwrap().reweighted(Weighting::InverseOutDegree, 0);
        let aug = augment_with_bias(&net, 0.0).unwrap();
        let dense = c2greedy(&aug, 5, Backend::Dense).unwrap();
        let series = c2greedy(&aug, 5, Backend::Neumann { terms: 30 }).unwrap();
        assert_eq!(dense.seeds(), series.seeds());
        assert_abs_diff_eq!(dense.sigma(), series.sigma(), epsilon = 1e-9);
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!(matches!("pmia".parse::<Algorithm>(), Err(Error::Config(_))));
    }
}
