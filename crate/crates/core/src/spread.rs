//! Closed-form infinite-horizon spread.
//!
//! For a seed set `S`, make the seeds and the bias node absorbing. With
//! `R` the interior-to-interior block and `B` the interior-to-boundary block
//! of `P`, the steady state on the interior is `v_I = (I - R)^{-1} B v_B`,
//! where `v_B` is 1 at seeds and `b` at the bias node. `F = (I - R)^{-1}` is
//! the fundamental matrix: `F[i][j]` is the expected number of visits to `j`
//! of a walk started at `i` before it is absorbed.
//!
//! Two backends produce `F`:
//!
//! - [`compute_fundamental_dense`] solves `(I - R) X = I` with a pivoted LU
//!   factorization and keeps every entry. Adding a seed is then a rank-1
//!   update ([`FundamentalMatrix::absorb`]), no new factorization needed.
//! - [`compute_fundamental_neumann`] truncates `I + R + ... + R^T` and keeps
//!   only the diagonal and the column sums, which is all the greedy selector
//!   reads. Individual columns are recomputed on demand with `T` sparse products.

use std::fmt;
use std::str::FromStr;

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::Mat;
use petgraph::graph::{DiGraph, NodeIndex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{estimate_effective_diameter, DEFAULT_DIAMETER_QUANTILE, DEFAULT_DIAMETER_SAMPLES};
use crate::graph::{build_transition_system, AugmentedNetwork, SeedSet, TransitionSystem};
use crate::sparse::CsrMatrix;

/// Interior size up to which [`Backend::Auto`] picks the dense backend.
pub const DENSE_LIMIT: usize = 10_000;

/// Tolerance for the algebraic identities between `F`, `R`, `B` and `Q`.
pub const IDENTITY_TOL: f64 = 1e-9;

/// How the fundamental matrix (or a spread value) is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Dense,
    Neumann { terms: usize },
    /// Dense up to [`DENSE_LIMIT`] interior nodes, otherwise the series
    /// truncated at the effective diameter.
    Auto,
}

impl Backend {
    /// Replaces `Auto` with a concrete backend for `aug`.
    pub fn resolve(self, aug: &AugmentedNetwork) -> Backend {
        match self {
            Backend::Auto if aug.n_raw() <= DENSE_LIMIT => Backend::Dense,
            Backend::Auto => Backend::Neumann {
                terms: default_series_terms(aug),
            },
            other => other,
        }
    }
}

/// Effective diameter (90% quantile) of `aug`'s network, 0 for edgeless graphs.
pub fn default_series_terms(aug: &AugmentedNetwork) -> usize {
    estimate_effective_diameter(aug.network(), DEFAULT_DIAMETER_SAMPLES, DEFAULT_DIAMETER_QUANTILE, 0)
        .unwrap_or(0)
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Dense => write!(f, "dense"),
            Backend::Neumann { terms } => write!(f, "neumann:{terms}"),
            Backend::Auto => write!(f, "auto"),
        }
    }
}

impl FromStr for Backend {
    type Err = Error;

    /// Accepts `dense`, `auto` and `neumann:T`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Backend::Dense),
            "auto" => Ok(Backend::Auto),
            _ => {
                let terms = s
                    .strip_prefix("neumann:")
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::Config(format!("unknown backend `{s}`")))?;
                Ok(Backend::Neumann { terms })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FundamentalKind {
    DenseExact,
    Neumann { terms: usize },
}

impl fmt::Display for FundamentalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FundamentalKind::DenseExact => write!(f, "dense"),
            FundamentalKind::Neumann { terms } => write!(f, "neumann:{terms}"),
        }
    }
}

#[derive(Debug, Clone)]
struct Series {
    r: CsrMatrix,
    terms: usize,
}

/// `F = (I - R)^{-1}` for one seed set, or its truncated series.
///
/// Entries are addressed by global node index. Nodes that were absorbed by a
/// rank-1 update are masked and no longer readable.
#[derive(Debug, Clone)]
pub struct FundamentalMatrix {
    kind: FundamentalKind,
    seeds: SeedSet,
    interior: Vec<usize>,
    slot: Vec<Option<usize>>,
    diag: Vec<f64>,
    colsum: Vec<f64>,
    dense: Option<Mat<f64>>,
    series: Option<Series>,
}

impl FundamentalMatrix {
    pub fn kind(&self) -> FundamentalKind {
        self.kind
    }

    pub fn seed_context(&self) -> &SeedSet {
        &self.seeds
    }

    /// Nodes still interior, ascending.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn is_interior(&self, node: usize) -> bool {
        self.slot_of(node).is_some()
    }

    fn slot_of(&self, node: usize) -> Option<usize> {
        self.slot.get(node).copied().flatten()
    }

    fn require(&self, node: usize) -> Result<usize> {
        self.slot_of(node)
            .ok_or_else(|| Error::validation(format!("node {node} is not interior under this seed set")))
    }

    fn unsupported(&self, operation: &'static str) -> Error {
        Error::UnsupportedBackend {
            backend: self.kind.to_string(),
            operation,
        }
    }

    /// `F[i][j]`, dense backend only.
    pub fn entry(&self, i: usize, j: usize) -> Result<f64> {
        let (si, sj) = (self.require(i)?, self.require(j)?);
        let dense = self.dense.as_ref().ok_or_else(|| self.unsupported("entry access"))?;
        Ok(dense[(si, sj)])
    }

    pub fn diagonal(&self, node: usize) -> Result<f64> {
        Ok(self.diag[self.require(node)?])
    }

    /// Sum of column `node` over the current interior.
    pub fn column_sum(&self, node: usize) -> Result<f64> {
        Ok(self.colsum[self.require(node)?])
    }

    /// Column sum of the diagonal-normalized matrix: `sum_i F[i][s] / F[s][s]`.
    pub fn normalized_column_sum(&self, node: usize) -> Result<f64> {
        let s = self.require(node)?;
        Ok(self.colsum[s] / self.diag[s])
    }

    /// Column `node` of `F`, listed in [`Self::interior`] order.
    pub fn column(&self, node: usize) -> Result<Vec<f64>> {
        let s = self.require(node)?;
        if let Some(dense) = &self.dense {
            return Ok(self.interior.iter().map(|&i| dense[(self.slot[i].unwrap(), s)]).collect());
        }
        let series = self.series.as_ref().expect("series backend");
        let mut term = vec![0.0; series.r.rows()];
        term[s] = 1.0;
        let mut acc = term.clone();
        let mut next = vec![0.0; term.len()];
        for _ in 0..series.terms {
            series.r.mul_vec_into(&term, &mut next);
            std::mem::swap(&mut term, &mut next);
            acc.iter_mut().zip(&term).for_each(|(a, t)| *a += t);
        }
        Ok(self.interior.iter().map(|&i| acc[self.slot[i].unwrap()]).collect())
    }

    /// Turns interior node `s` into a seed in place:
    /// `F'[i][j] = F[i][j] - F[i][s] F[s][j] / F[s][s]`, then masks row and column `s`.
    pub fn absorb(&mut self, node: usize) -> Result<()> {
        let s = self.require(node)?;
        if self.dense.is_none() {
            return Err(self.unsupported("rank-1 update"));
        }
        let fss = self.diag[s];
        if fss <= 0.0 {
            return Err(Error::validation(format!("F[{node}][{node}] = {fss} is not positive")));
        }
        let slots: Vec<usize> = self.interior.iter().map(|&i| self.slot[i].unwrap()).collect();
        let dense = self.dense.as_mut().unwrap();
        let col_s: Vec<f64> = slots.iter().map(|&si| dense[(si, s)]).collect();
        for &sj in &slots {
            let factor = dense[(s, sj)] / fss;
            let mut sum = 0.0;
            if factor != 0.0 {
                for (&si, &cs) in slots.iter().zip(&col_s) {
                    let v = dense[(si, sj)] - cs * factor;
                    dense[(si, sj)] = v;
                    sum += v;
                }
            } else {
                for &si in &slots {
                    sum += dense[(si, sj)];
                }
            }
            self.colsum[sj] = sum - dense[(s, sj)];
            self.diag[sj] = dense[(sj, sj)];
        }
        for &si in &slots {
            dense[(si, s)] = 0.0;
            dense[(s, si)] = 0.0;
        }
        // Row s was counted in the sums above; it is now zero.
        self.diag[s] = 0.0;
        self.colsum[s] = 0.0;
        self.slot[node] = None;
        self.interior.retain(|&i| i != node);
        self.seeds = self.seeds.with(node)?;
        Ok(())
    }

    /// Dense copy over the current interior, rows and columns in [`Self::interior`] order.
    pub fn to_rows(&self) -> Result<Vec<Vec<f64>>> {
        let dense = self.dense.as_ref().ok_or_else(|| self.unsupported("dense export"))?;
        Ok(self
            .interior
            .iter()
            .map(|&i| {
                self.interior
                    .iter()
                    .map(|&j| dense[(self.slot[i].unwrap(), self.slot[j].unwrap())])
                    .collect()
            })
            .collect())
    }

    /// `max |F - (I + F R)|` against the transition system of the same seed set.
    pub fn identity_residual(&self, ts: &TransitionSystem) -> Result<f64> {
        let f = self.to_rows()?;
        self.check_context(ts)?;
        let n = f.len();
        let mut worst: f64 = 0.0;
        for (a, row) in f.iter().enumerate() {
            let mut fr = vec![0.0; n];
            for (k, &fk) in row.iter().enumerate() {
                if fk == 0.0 {
                    continue;
                }
                for (j, w) in ts.r().row_entries(k) {
                    fr[j] += fk * w;
                }
            }
            for j in 0..n {
                let eye = if a == j { 1.0 } else { 0.0 };
                worst = worst.max((row[j] - eye - fr[j]).abs());
            }
        }
        Ok(worst)
    }

    fn check_context(&self, ts: &TransitionSystem) -> Result<()> {
        if ts.interior() != self.interior.as_slice() {
            return Err(Error::validation(
                "fundamental matrix and transition system have different interiors",
            ));
        }
        Ok(())
    }
}

/// Exact `F` by LU factorization of `I - R`.
pub fn compute_fundamental_dense(ts: &TransitionSystem) -> Result<FundamentalMatrix> {
    if let Some(node) = ts.trapped_node() {
        return Err(Error::Singular { node });
    }
    let ni = ts.interior().len();
    let f = if ni == 0 {
        Mat::zeros(0, 0)
    } else {
        let a = identity_minus(ts.r());
        let mut f = a.partial_piv_lu().inverse();
        // Round-off can leave -1e-17 where the exact entry is zero.
        for j in 0..ni {
            for i in 0..ni {
                if f[(i, j)] < 0.0 {
                    f[(i, j)] = 0.0;
                }
            }
        }
        f
    };
    let diag = (0..ni).map(|i| f[(i, i)]).collect();
    let colsum = (0..ni).map(|j| (0..ni).map(|i| f[(i, j)]).sum()).collect();
    Ok(FundamentalMatrix {
        kind: FundamentalKind::DenseExact,
        seeds: ts.seeds().clone(),
        interior: ts.interior().to_vec(),
        slot: slots(ts),
        diag,
        colsum,
        dense: Some(f),
        series: None,
    })
}

fn slots(ts: &TransitionSystem) -> Vec<Option<usize>> {
    (0..ts.n()).map(|v| ts.interior_position(v)).collect()
}

fn identity_minus(r: &CsrMatrix) -> Mat<f64> {
    let n = r.rows();
    let mut a = Mat::<f64>::identity(n, n);
    for i in 0..n {
        for (j, w) in r.row_entries(i) {
            a[(i, j)] -= w;
        }
    }
    a
}

/// Diagonal and column sums of `I + R + ... + R^terms`.
///
/// Column sums take `terms` products with `Rᵀ`. A closed walk from `s` never
/// leaves the strongly connected component of `s`, so the diagonal is exactly
/// 1 outside nontrivial components and is accumulated per node inside them.
pub fn compute_fundamental_neumann(ts: &TransitionSystem, terms: usize) -> FundamentalMatrix {
    let r = ts.r();
    let ni = r.rows();

    let mut colsum = vec![1.0; ni];
    let mut term = vec![1.0; ni];
    let mut next = vec![0.0; ni];
    for _ in 0..terms {
        r.mul_vec_transposed_into(&term, &mut next);
        std::mem::swap(&mut term, &mut next);
        colsum.iter_mut().zip(&term).for_each(|(c, t)| *c += t);
    }

    let diag = series_diagonal(r, terms);

    FundamentalMatrix {
        kind: FundamentalKind::Neumann { terms },
        seeds: ts.seeds().clone(),
        interior: ts.interior().to_vec(),
        slot: slots(ts),
        diag,
        colsum,
        dense: None,
        series: Some(Series { r: r.clone(), terms }),
    }
}

fn series_diagonal(r: &CsrMatrix, terms: usize) -> Vec<f64> {
    let ni = r.rows();
    let mut diag = vec![1.0; ni];
    if terms == 0 || r.nnz() == 0 {
        return diag;
    }
    let mut graph = DiGraph::<(), ()>::with_capacity(ni, r.nnz());
    for _ in 0..ni {
        graph.add_node(());
    }
    for i in 0..ni {
        for (j, _) in r.row_entries(i) {
            graph.add_edge(NodeIndex::new(i), NodeIndex::new(j), ());
        }
    }
    let mut component = vec![usize::MAX; ni];
    let mut cyclic = Vec::new();
    for (c, members) in petgraph::algo::tarjan_scc(&graph).into_iter().enumerate() {
        if members.len() > 1 {
            for m in &members {
                component[m.index()] = c;
                cyclic.push(m.index());
            }
        }
    }
    cyclic.sort_unstable();

    let returns: Vec<(usize, f64)> = cyclic
        .par_iter()
        .map_init(
            || (vec![0.0; ni], vec![0.0; ni], Vec::new(), Vec::new()),
            |(cur, nxt, live, born), &s| {
                let c = component[s];
                cur[s] = 1.0;
                live.clear();
                live.push(s);
                let mut total = 1.0;
                for _ in 0..terms {
                    born.clear();
                    for &i in live.iter() {
                        let x = cur[i];
                        for (j, w) in r.row_entries(i) {
                            if component[j] == c {
                                if nxt[j] == 0.0 {
                                    born.push(j);
                                }
                                nxt[j] += x * w;
                            }
                        }
                        cur[i] = 0.0;
                    }
                    total += nxt[s];
                    std::mem::swap(cur, nxt);
                    std::mem::swap(live, born);
                }
                for &i in live.iter() {
                    cur[i] = 0.0;
                }
                (s, total)
            },
        )
        .collect();
    for (s, d) in returns {
        diag[s] = d;
    }
    diag
}

/// Returns `F` for `seed_context ∪ {s}` without refactorizing.
pub fn update_fundamental_rank1(f: &FundamentalMatrix, s: usize) -> Result<FundamentalMatrix> {
    if f.dense.is_none() {
        return Err(f.unsupported("rank-1 update"));
    }
    let mut next = f.clone();
    next.absorb(s)?;
    Ok(next)
}

/// Absorption probabilities for every interior node (rows) and boundary node (columns).
#[derive(Debug, Clone)]
pub struct AbsorptionMatrix {
    q: Mat<f64>,
    interior: Vec<usize>,
    boundary: Vec<usize>,
}

impl AbsorptionMatrix {
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    /// Probability that a walk from interior node `i` is absorbed at boundary node `b`.
    pub fn get(&self, i: usize, b: usize) -> Option<f64> {
        let r = self.interior.binary_search(&i).ok()?;
        let c = self.boundary.binary_search(&b).ok()?;
        Some(self.q[(r, c)])
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.interior.len())
            .map(|r| (0..self.boundary.len()).map(|c| self.q[(r, c)]).sum())
            .collect()
    }

    /// Column for boundary node `b`, in interior order.
    pub fn column(&self, b: usize) -> Option<Vec<f64>> {
        let c = self.boundary.binary_search(&b).ok()?;
        Some((0..self.interior.len()).map(|r| self.q[(r, c)]).collect())
    }

    /// `Q v_B` for boundary data in [`Self::boundary`] order.
    pub fn apply(&self, boundary_values: &[f64]) -> Vec<f64> {
        (0..self.interior.len())
            .map(|r| {
                boundary_values
                    .iter()
                    .enumerate()
                    .map(|(c, &x)| self.q[(r, c)] * x)
                    .sum()
            })
            .collect()
    }
}

/// `Q = F B`.
pub fn absorption_from_fundamental(f: &FundamentalMatrix, ts: &TransitionSystem) -> Result<AbsorptionMatrix> {
    f.check_context(ts)?;
    let dense = f.dense.as_ref().ok_or_else(|| f.unsupported("absorption matrix"))?;
    let ni = ts.interior().len();
    let nb = ts.boundary().len();
    let slot: Vec<usize> = ts.interior().iter().map(|&i| f.slot[i].unwrap()).collect();
    let mut q = Mat::<f64>::zeros(ni, nb);
    let b = ts.b_block();
    for k in 0..ni {
        for (c, w) in b.row_entries(k) {
            for r in 0..ni {
                q[(r, c)] += dense[(slot[r], slot[k])] * w;
            }
        }
    }
    Ok(AbsorptionMatrix {
        q,
        interior: ts.interior().to_vec(),
        boundary: ts.boundary().to_vec(),
    })
}

/// Probability that a walk from each interior node hits `s` before any
/// other boundary once `s` is made a seed: `F[i][s] / F[s][s]`, interior order.
pub fn new_seed_absorption(f: &FundamentalMatrix, s: usize) -> Result<Vec<f64>> {
    let fss = f.diagonal(s)?;
    Ok(f.column(s)?.into_iter().map(|x| x / fss).collect())
}

/// Infinite-horizon adoption probabilities for one seed set.
#[derive(Debug, Clone)]
pub struct SteadyState {
    /// One value per node, bias node last.
    pub v: Vec<f64>,
    pub seeds: SeedSet,
    /// Sum of `v` over the original (non-bias) nodes.
    pub sigma: f64,
}

impl SteadyState {
    /// `max |(P v)_i - v_i|` over interior nodes.
    pub fn harmonic_residual(&self, ts: &TransitionSystem) -> f64 {
        let pv = ts.apply_p(&self.v);
        ts.interior()
            .iter()
            .map(|&i| (pv[i] - self.v[i]).abs())
            .fold(0.0, f64::max)
    }
}

/// `v_I = (I - R)^{-1} B v_B`, solved by LU for a single right-hand side.
pub fn steady_state(ts: &TransitionSystem, b: f64) -> Result<SteadyState> {
    if let Some(node) = ts.trapped_node() {
        return Err(Error::Singular { node });
    }
    let rhs = ts.b_block().mul_vec(&ts.boundary_values(b));
    let x = dense_solve(ts.r(), &rhs);
    Ok(assemble(ts, b, &x))
}

fn assemble(ts: &TransitionSystem, b: f64, interior_values: &[f64]) -> SteadyState {
    let mut v = vec![0.0; ts.n()];
    for s in ts.seeds().iter() {
        v[s] = 1.0;
    }
    v[ts.bias_index()] = b;
    for (&i, &x) in ts.interior().iter().zip(interior_values) {
        v[i] = x.clamp(0.0, 1.0);
    }
    let sigma = v[..ts.bias_index()].iter().sum();
    SteadyState {
        v,
        seeds: ts.seeds().clone(),
        sigma,
    }
}

fn dense_solve(r: &CsrMatrix, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    if n == 0 {
        return Vec::new();
    }
    let a = identity_minus(r);
    let mut col = Mat::<f64>::zeros(n, 1);
    for (i, &x) in rhs.iter().enumerate() {
        col[(i, 0)] = x;
    }
    let x = a.partial_piv_lu().solve(&col);
    (0..n).map(|i| x[(i, 0)]).collect()
}

fn series_solve(r: &CsrMatrix, rhs: &[f64], terms: usize) -> Vec<f64> {
    let mut acc = rhs.to_vec();
    let mut term = rhs.to_vec();
    let mut next = vec![0.0; rhs.len()];
    for _ in 0..terms {
        r.mul_vec_into(&term, &mut next);
        std::mem::swap(&mut term, &mut next);
        acc.iter_mut().zip(&term).for_each(|(a, t)| *a += t);
    }
    acc
}

/// Steady state with bias value 0 under the chosen backend.
pub fn steady_state_with(aug: &AugmentedNetwork, seeds: &SeedSet, backend: Backend) -> Result<SteadyState> {
    let ts = build_transition_system(aug, seeds)?;
    match backend.resolve(aug) {
        Backend::Neumann { terms } => {
            let rhs = ts.b_block().mul_vec(&ts.boundary_values(0.0));
            Ok(assemble(&ts, 0.0, &series_solve(ts.r(), &rhs, terms)))
        }
        _ => steady_state(&ts, 0.0),
    }
}

/// Expected number of active original nodes at steady state, bias value 0:
/// `|S| + sum_i sum_{s in S} Q[i][s]`.
pub fn influence_spread(aug: &AugmentedNetwork, seeds: &SeedSet, backend: Backend) -> Result<f64> {
    Ok(steady_state_with(aug, seeds, backend)?.sigma)
}

/// Sweep cap for [`steady_state_iterative`].
pub const MAX_SWEEPS: usize = 100_000;

/// Steady state with bias value 0 by Gauss-Seidel sweeps over the sparse
/// rows of `P`, starting from `warm` (one value per node, bias last) when
/// given. Stops once no entry moves by more than `tol` in a sweep.
///
/// Adding a seed only raises `v`, so the previous seed set's steady state is
/// a good starting point; this is how the closed-form-only greedy evaluates
/// candidates without a factorization per candidate.
pub fn steady_state_iterative(aug: &AugmentedNetwork, seeds: &SeedSet, warm: Option<&[f64]>, tol: f64) -> Result<SteadyState> {
    let n_raw = aug.n_raw();
    let mut pinned = vec![false; n_raw];
    for s in seeds.iter() {
        if s >= n_raw {
            return Err(Error::validation(format!("seed {s} is outside 0..{n_raw}")));
        }
        pinned[s] = true;
    }
    let mut v = match warm {
        Some(w) if w.len() == n_raw + 1 => w.to_vec(),
        Some(_) => return Err(Error::validation("warm start must have one value per node")),
        None => vec![0.0; n_raw + 1],
    };
    v[n_raw] = 0.0;
    for s in seeds.iter() {
        v[s] = 1.0;
    }
    let p = aug.transition();
    for _ in 0..MAX_SWEEPS {
        let mut moved: f64 = 0.0;
        for i in (0..n_raw).filter(|&i| !pinned[i]) {
            let (cols, vals) = p.row(i);
            let x: f64 = cols.iter().zip(vals).map(|(&j, &w)| w * v[j]).sum();
            moved = moved.max((x - v[i]).abs());
            v[i] = x;
        }
        if moved <= tol {
            for x in v.iter_mut() {
                *x = x.clamp(0.0, 1.0);
            }
            let sigma = v[..n_raw].iter().sum();
            return Ok(SteadyState {
                v,
                seeds: seeds.clone(),
                sigma,
            });
        }
    }
    Err(Error::validation(format!("Gauss-Seidel did not settle within {MAX_SWEEPS} sweeps")))
}
