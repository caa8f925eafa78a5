//! Simulation oracles for the closed forms.
//!
//! Two kinds of dynamics live here:
//!
//! - binary cascades, where each non-seed node redraws its state every step
//!   with probability given by the choice rule of the active [`ModelMode`];
//! - the deterministic transient `u(t+1) = P u(t)` that the binary process
//!   follows in expectation.
//!
//! Monte Carlo runs are independent. Run `r` draws from a ChaCha8 stream
//! seeded with the experiment seed and stream id `r`, so results do not depend
//! on how runs are scheduled across threads.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_transition_system, AugmentedNetwork, Network, SeedSet, TransitionSystem, STOCHASTIC_TOL};

/// Bias value under which HC reproduces two-color GLT.
pub const GLT_BIAS_VALUE: f64 = 0.5;

/// Which non-progressive model's choice rule drives the binary cascade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelMode {
    Hc,
    /// `m alpha_i + r gamma_i + (1 - alpha_i - gamma_i) sum_j w_ij delta_j`.
    HcGeneral { media: f64, reluctance: f64 },
    /// Copy a uniformly chosen neighbor: `beta = 0`, `w_ij = 1 / d_i`.
    Voter,
    /// Non-progressive linear threshold with a fresh uniform threshold each step; `b = 0`.
    Nlt,
    /// Two-color generalized linear threshold: uniform bias weight `beta` and
    /// `b = 1/2`, so the bias term `beta * b` is the `beta / 2` of a random color pick.
    GltBinary { beta: f64 },
}

impl ModelMode {
    /// Checks the mode's parameter constraints against the network.
    pub fn validate(&self, aug: &AugmentedNetwork) -> Result<()> {
        let n_raw = aug.n_raw();
        match *self {
            ModelMode::Hc => Ok(()),
            ModelMode::HcGeneral { media, reluctance } => {
                if !(0.0..=1.0).contains(&media) || !(0.0..=1.0).contains(&reluctance) {
                    return Err(Error::validation("media and reluctance must lie in [0, 1]"));
                }
                Ok(())
            }
            ModelMode::Voter => {
                for i in 0..n_raw {
                    if aug.is_dangling(i) {
                        return Err(Error::validation(format!("voter mode: node {i} has no neighbors")));
                    }
                    if aug.bias_weights()[i] != 0.0 {
                        return Err(Error::validation(format!("voter mode needs beta = 0 (node {i})")));
                    }
                    let d = aug.social().row(i).0.len() as f64;
                    if aug.social().row(i).1.iter().any(|w| (w - 1.0 / d).abs() > STOCHASTIC_TOL) {
                        return Err(Error::validation(format!("voter mode needs 1/d weights (node {i})")));
                    }
                }
                Ok(())
            }
            ModelMode::Nlt => {
                if aug.bias_value() != 0.0 {
                    return Err(Error::validation("nlt mode needs bias value b = 0"));
                }
                Ok(())
            }
            ModelMode::GltBinary { beta } => {
                if (aug.bias_value() - GLT_BIAS_VALUE).abs() > STOCHASTIC_TOL {
                    return Err(Error::validation(format!(
                        "glt mode needs b = {GLT_BIAS_VALUE}, got {}",
                        aug.bias_value()
                    )));
                }
                for i in (0..n_raw).filter(|&i| !aug.is_dangling(i)) {
                    if (aug.bias_weights()[i] - beta).abs() > STOCHASTIC_TOL {
                        return Err(Error::validation(format!("glt mode needs uniform beta {beta} (node {i})")));
                    }
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for ModelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelMode::Hc => write!(f, "hc"),
            ModelMode::HcGeneral { media, reluctance } => write!(f, "hc_general:{media}:{reluctance}"),
            ModelMode::Voter => write!(f, "voter"),
            ModelMode::Nlt => write!(f, "nlt"),
            ModelMode::GltBinary { beta } => write!(f, "glt:{beta}"),
        }
    }
}

impl FromStr for ModelMode {
    type Err = Error;

    /// `hc`, `voter`, `nlt`, `glt:<beta>` or `hc_general:<m>:<r>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown model mode `{s}`"));
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
        match parts.as_slice() {
            ["hc"] => Ok(ModelMode::Hc),
            ["voter"] => Ok(ModelMode::Voter),
            ["nlt"] => Ok(ModelMode::Nlt),
            ["glt", beta] => Ok(ModelMode::GltBinary { beta: num(beta)? }),
            ["hc_general"] => Ok(ModelMode::HcGeneral {
                media: 1.0,
                reluctance: 0.0,
            }),
            ["hc_general", m, r] => Ok(ModelMode::HcGeneral {
                media: num(m)?,
                reluctance: num(r)?,
            }),
            _ => Err(bad()),
        }
    }
}

/// How a node's Bernoulli choice is realized. Both give the same per-node
/// adoption probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampling {
    /// Adopt iff a fresh threshold `theta ~ U(0,1]` is at most the active mass.
    #[default]
    Threshold,
    /// Pick one trusted neighbor (or the bias node) by weight and copy its state.
    NeighborCopy,
}

/// Per-node choice rule of one mode over one augmented network.
struct Kernel<'a> {
    aug: &'a AugmentedNetwork,
    mode: ModelMode,
    /// `followers[off[j]..off[j+1]]` lists the nodes that trust original node `j`.
    follower_offsets: Vec<usize>,
    followers: Vec<usize>,
}

impl<'a> Kernel<'a> {
    fn new(aug: &'a AugmentedNetwork, mode: ModelMode) -> Result<Self> {
        mode.validate(aug)?;
        let n_raw = aug.n_raw();
        let mut counts = vec![0usize; n_raw + 1];
        for i in 0..n_raw {
            for &j in aug.social().row(i).0 {
                counts[j + 1] += 1;
            }
        }
        for j in 0..n_raw {
            counts[j + 1] += counts[j];
        }
        let mut fill = counts.clone();
        let mut followers = vec![0; counts[n_raw]];
        for i in 0..n_raw {
            for &j in aug.social().row(i).0 {
                followers[fill[j]] = i;
                fill[j] += 1;
            }
        }
        Ok(Self {
            aug,
            mode,
            follower_offsets: counts,
            followers,
        })
    }

    fn followers_of(&self, j: usize) -> &[usize] {
        &self.followers[self.follower_offsets[j]..self.follower_offsets[j + 1]]
    }

    /// Whether a node with no active neighbor and an inactive bias node
    /// must be inactive, which lets a step visit only followers of active nodes.
    fn frontier_exact(&self, sampling: Sampling) -> bool {
        sampling == Sampling::Threshold && !matches!(self.mode, ModelMode::HcGeneral { .. })
    }

    /// Adoption probability of node `i` given neighbor states (or probabilities)
    /// and the bias node's state.
    fn probability(&self, i: usize, state: impl Fn(usize) -> f64, bias: f64) -> f64 {
        match self.mode {
            ModelMode::HcGeneral { media, reluctance } => {
                let net = self.aug.network();
                let (a, g) = (net.alpha()[i], net.gamma()[i]);
                let social: f64 = self.aug.social().row_entries(i).map(|(j, w)| w * state(j)).sum();
                media * a + reluctance * g + (1.0 - a - g) * social
            }
            _ => {
                let social: f64 = self.aug.transition().row_entries(i).map(|(j, w)| w * state(j)).sum();
                social + self.aug.bias_weights()[i] * bias
            }
        }
    }

    fn sample(&self, i: usize, active: &[bool], bias_active: bool, sampling: Sampling, rng: &mut impl Rng) -> bool {
        match sampling {
            Sampling::Threshold => {
                let mass = self.probability(i, |j| active[j] as u8 as f64, bias_active as u8 as f64);
                mass > 0.0 && 1.0 - rng.random::<f64>() <= mass
            }
            Sampling::NeighborCopy => {
                let mut u: f64 = rng.random();
                if let ModelMode::HcGeneral { media, reluctance } = self.mode {
                    let net = self.aug.network();
                    let (a, g) = (net.alpha()[i], net.gamma()[i]);
                    if u < a {
                        return rng.random::<f64>() < media;
                    }
                    if u < a + g {
                        return rng.random::<f64>() < reluctance;
                    }
                    u = (u - a - g) / (1.0 - a - g);
                    for (j, w) in self.aug.social().row_entries(i) {
                        if u < w {
                            return active[j];
                        }
                        u -= w;
                    }
                    return false;
                }
                for (j, w) in self.aug.transition().row_entries(i) {
                    if u < w {
                        return active[j];
                    }
                    u -= w;
                }
                bias_active
            }
        }
    }
}

/// Binary state of one cascade run.
#[derive(Debug, Clone)]
pub struct CascadeState {
    active: Vec<bool>,
    /// Active original nodes, ascending.
    active_list: Vec<usize>,
    pinned: Vec<bool>,
    seeds: Vec<usize>,
    bias_active: bool,
    t: usize,
    rng: ChaCha8Rng,
    mark: Vec<u32>,
    stamp: u32,
    scratch: Vec<usize>,
    next: Vec<bool>,
}

impl CascadeState {
    /// Seeds start (and stay) active; other nodes start active with
    /// probability `initial[i]` (all inactive when `initial` is `None`).
    pub fn new(aug: &AugmentedNetwork, seeds: &SeedSet, initial: Option<&[f64]>, mut rng: ChaCha8Rng) -> Result<Self> {
        let n_raw = aug.n_raw();
        if let Some(z) = initial {
            if z.len() != n_raw {
                return Err(Error::validation(format!("initial state has {} entries, expected {n_raw}", z.len())));
            }
        }
        let mut pinned = vec![false; n_raw];
        for s in seeds.iter() {
            if s >= n_raw {
                return Err(Error::validation(format!("seed {s} is outside 0..{n_raw}")));
            }
            pinned[s] = true;
        }
        let active: Vec<bool> = (0..n_raw)
            .map(|i| pinned[i] || initial.is_some_and(|z| z[i] > 0.0 && rng.random::<f64>() < z[i]))
            .collect();
        let active_list = (0..n_raw).filter(|&i| active[i]).collect();
        let mut sorted_seeds = seeds.members().to_vec();
        sorted_seeds.sort_unstable();
        let bias_active = rng.random::<f64>() < aug.bias_value();
        Ok(Self {
            active,
            active_list,
            pinned,
            seeds: sorted_seeds,
            bias_active,
            t: 0,
            rng,
            mark: vec![0; n_raw],
            stamp: 0,
            scratch: Vec::new(),
            next: Vec::new(),
        })
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.active[i]
    }

    pub fn bias_active(&self) -> bool {
        self.bias_active
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn active_count(&self) -> usize {
        self.active_list.len()
    }

    fn advance(&mut self, kernel: &Kernel<'_>, sampling: Sampling) {
        // Past a few percent of active nodes the sorted frontier costs more than a sweep.
        let sparse = self.active_list.len() * 32 < self.active.len();
        if sparse && !self.bias_active && kernel.frontier_exact(sampling) {
            self.advance_frontier(kernel);
        } else {
            self.advance_full(kernel, sampling);
        }
        self.bias_active = self.rng.random::<f64>() < kernel.aug.bias_value();
        self.t += 1;
    }

    fn advance_full(&mut self, kernel: &Kernel<'_>, sampling: Sampling) {
        let mut next = std::mem::take(&mut self.next);
        next.clear();
        next.extend(
            (0..self.active.len())
                .map(|i| self.pinned[i] || kernel.sample(i, &self.active, self.bias_active, sampling, &mut self.rng)),
        );
        std::mem::swap(&mut self.active, &mut next);
        self.next = next;
        self.active_list.clear();
        self.active_list.extend((0..self.active.len()).filter(|&i| self.active[i]));
    }

    /// Same draws, in the same order, as a full sweep: nodes without an
    /// active neighbor have zero mass and consume no randomness.
    fn advance_frontier(&mut self, kernel: &Kernel<'_>) {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.stamp = 1;
        }
        let mut cand = std::mem::take(&mut self.scratch);
        cand.clear();
        for &j in &self.active_list {
            for &i in kernel.followers_of(j) {
                if self.mark[i] != self.stamp && !self.pinned[i] {
                    self.mark[i] = self.stamp;
                    cand.push(i);
                }
            }
        }
        cand.sort_unstable();
        let mut adopted = Vec::with_capacity(cand.len() + self.seeds.len());
        for &i in &cand {
            if kernel.sample(i, &self.active, false, Sampling::Threshold, &mut self.rng) {
                adopted.push(i);
            }
        }
        for &j in &self.active_list {
            self.active[j] = false;
        }
        let mut next = Vec::with_capacity(adopted.len() + self.seeds.len());
        let (mut a, mut s) = (0, 0);
        while a < adopted.len() || s < self.seeds.len() {
            if s == self.seeds.len() || (a < adopted.len() && adopted[a] < self.seeds[s]) {
                next.push(adopted[a]);
                a += 1;
            } else {
                next.push(self.seeds[s]);
                s += 1;
            }
        }
        for &j in &next {
            self.active[j] = true;
        }
        self.active_list = next;
        self.scratch = cand;
    }
}

/// One synchronous step of the binary cascade.
pub fn step_binary(state: CascadeState, aug: &AugmentedNetwork, mode: ModelMode) -> Result<CascadeState> {
    step_binary_with(state, aug, mode, Sampling::default())
}

pub fn step_binary_with(
    mut state: CascadeState,
    aug: &AugmentedNetwork,
    mode: ModelMode,
    sampling: Sampling,
) -> Result<CascadeState> {
    if state.active.len() != aug.n_raw() {
        return Err(Error::validation("cascade state does not match the network"));
    }
    let kernel = Kernel::new(aug, mode)?;
    state.advance(&kernel, sampling);
    Ok(state)
}

/// Adoption probability of every original node one step after `state`.
pub fn choice_probabilities(state: &CascadeState, aug: &AugmentedNetwork, mode: ModelMode) -> Result<Vec<f64>> {
    let kernel = Kernel::new(aug, mode)?;
    let b = aug.bias_value();
    Ok((0..aug.n_raw())
        .map(|i| {
            if state.pinned[i] {
                1.0
            } else {
                kernel.probability(i, |j| state.active[j] as u8 as f64, b)
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
}

impl McEstimate {
    fn from_counts(counts: impl Iterator<Item = f64> + Clone, runs: usize) -> Self {
        let n = runs as f64;
        let mean = counts.clone().sum::<f64>() / n;
        let stderr = if runs > 1 {
            let var = counts.map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        McEstimate { mean, stderr }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: usize,
    pub mean_active: f64,
    pub stderr: f64,
}

/// Monte Carlo estimator over independent cascade runs. Build once, then
/// evaluate any number of seed sets.
pub struct MonteCarlo<'a> {
    kernel: Kernel<'a>,
    horizon: usize,
    runs: usize,
    rng_seed: u64,
    initial: Option<Vec<f64>>,
    sampling: Sampling,
}

impl<'a> MonteCarlo<'a> {
    pub fn new(aug: &'a AugmentedNetwork, mode: ModelMode, horizon: usize, runs: usize, rng_seed: u64) -> Result<Self> {
        if runs == 0 {
            return Err(Error::validation("Monte Carlo needs at least one run"));
        }
        Ok(Self {
            kernel: Kernel::new(aug, mode)?,
            horizon,
            runs,
            rng_seed,
            initial: None,
            sampling: Sampling::default(),
        })
    }

    /// Initial adoption probabilities of non-seed nodes, one per original node.
    pub fn with_initial(mut self, z: Vec<f64>) -> Result<Self> {
        if z.len() != self.kernel.aug.n_raw() || z.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::validation("initial probabilities must be one value in [0, 1] per node"));
        }
        self.initial = Some(z);
        Ok(self)
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn runs(&self) -> usize {
        self.runs
    }

    /// Runs one cascade to the horizon, calling `observe` after every step
    /// (and once for `t = 0`).
    fn run(&self, seeds: &SeedSet, run: u64, mut observe: impl FnMut(&CascadeState)) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(run);
        let mut state = CascadeState::new(self.kernel.aug, seeds, self.initial.as_deref(), rng)?;
        observe(&state);
        for _ in 0..self.horizon {
            state.advance(&self.kernel, self.sampling);
            observe(&state);
        }
        Ok(())
    }

    /// Mean and standard error of the active count at the horizon.
    pub fn spread(&self, seeds: &SeedSet) -> Result<McEstimate> {
        let counts = (0..self.runs as u64)
            .into_par_iter()
            .map(|r| {
                let mut last = 0;
                self.run(seeds, r, |s| {
                    if s.t == self.horizon {
                        last = s.active_count();
                    }
                })?;
                Ok(last as f64)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(McEstimate::from_counts(counts.iter().copied(), self.runs))
    }

    /// Mean active count at every `t = 0..=horizon`.
    pub fn trajectory(&self, seeds: &SeedSet) -> Result<Vec<TrajectoryPoint>> {
        let per_run = (0..self.runs as u64)
            .into_par_iter()
            .map(|r| {
                let mut counts = Vec::with_capacity(self.horizon + 1);
                self.run(seeds, r, |s| counts.push(s.active_count() as u32))?;
                Ok(counts)
            })
            .collect::<Result<Vec<Vec<u32>>>>()?;
        Ok((0..=self.horizon)
            .map(|t| {
                let est = McEstimate::from_counts(per_run.iter().map(|c| c[t] as f64), self.runs);
                TrajectoryPoint {
                    t,
                    mean_active: est.mean,
                    stderr: est.stderr,
                }
            })
            .collect())
    }

    /// Fraction of runs in which each original node is active at the horizon.
    pub fn node_frequencies(&self, seeds: &SeedSet) -> Result<Vec<f64>> {
        let n_raw = self.kernel.aug.n_raw();
        let totals = (0..self.runs as u64)
            .into_par_iter()
            .try_fold(
                || vec![0u64; n_raw],
                |mut acc, r| {
                    self.run(seeds, r, |s| {
                        if s.t == self.horizon {
                            for &j in &s.active_list {
                                acc[j] += 1;
                            }
                        }
                    })?;
                    Ok::<_, Error>(acc)
                },
            )
            .try_reduce(
                || vec![0u64; n_raw],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    Ok(a)
                },
            )?;
        Ok(totals.into_iter().map(|c| c as f64 / self.runs as f64).collect())
    }
}

/// Mean and standard error of the number of active original nodes at `horizon`.
pub fn mc_spread_estimate(
    aug: &AugmentedNetwork,
    seeds: &SeedSet,
    mode: ModelMode,
    horizon: usize,
    runs: usize,
    rng_seed: u64,
) -> Result<McEstimate> {
    if horizon == 0 {
        return Err(Error::validation("horizon must be at least 1"));
    }
    MonteCarlo::new(aug, mode, horizon, runs, rng_seed)?.spread(seeds)
}

/// Adoption probabilities `u(:, t)` over all nodes, bias last.
#[derive(Debug, Clone, PartialEq)]
pub struct TransientState {
    pub u: Vec<f64>,
    pub t: usize,
    /// Initial interior values; zero at boundary nodes.
    pub z: Vec<f64>,
}

impl TransientState {
    /// `u(:, 0) = z + boundary data`. `z` has one entry per original node
    /// (`None` means all zeros); entries at seeds are ignored.
    pub fn new(ts: &TransitionSystem, z: Option<&[f64]>, b: f64) -> Result<Self> {
        let n_raw = ts.bias_index();
        let mut zv = vec![0.0; ts.n()];
        if let Some(z) = z {
            if z.len() != n_raw {
                return Err(Error::validation(format!("initial values have {} entries, expected {n_raw}", z.len())));
            }
            for &i in ts.interior() {
                if !(0.0..=1.0).contains(&z[i]) {
                    return Err(Error::validation(format!("initial value of node {i} outside [0, 1]")));
                }
                zv[i] = z[i];
            }
        }
        let mut u = zv.clone();
        for s in ts.seeds().iter() {
            u[s] = 1.0;
        }
        u[ts.bias_index()] = b;
        Ok(Self { u, t: 0, z: zv })
    }

    /// Sum over original nodes.
    pub fn spread(&self) -> f64 {
        self.u[..self.u.len() - 1].iter().sum()
    }
}

/// `u(t+1) = P u(t)`, boundary pinned to its data.
pub fn step_transient(state: TransientState, ts: &TransitionSystem, b: f64) -> TransientState {
    let mut u = ts.apply_p(&state.u);
    for s in ts.seeds().iter() {
        u[s] = 1.0;
    }
    u[ts.bias_index()] = b;
    for x in u.iter_mut() {
        *x = x.clamp(0.0, 1.0);
    }
    TransientState {
        u,
        t: state.t + 1,
        z: state.z,
    }
}

/// Deterministic `sigma(S, t)` after `t` steps from `u(:, 0) = z + boundary data`.
pub fn transient_spread(aug: &AugmentedNetwork, seeds: &SeedSet, z: Option<&[f64]>, b: f64, t: usize) -> Result<f64> {
    let ts = build_transition_system(aug, seeds)?;
    let mut state = TransientState::new(&ts, z, b)?;
    for _ in 0..t {
        state = step_transient(state, &ts, b);
    }
    Ok(state.spread())
}

/// Steps until `max |u(t+1) - u(t)| < tol` or `max_steps` is reached.
pub fn transient_until_converged(ts: &TransitionSystem, z: Option<&[f64]>, b: f64, max_steps: usize, tol: f64) -> Result<TransientState> {
    let mut state = TransientState::new(ts, z, b)?;
    for _ in 0..max_steps {
        let prev = state.u.clone();
        state = step_transient(state, ts, b);
        let delta = prev.iter().zip(&state.u).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
        if delta < tol {
            break;
        }
    }
    Ok(state)
}

/// Expected dynamics of any mode: the choice rule applied to probabilities.
/// Returns `u(t)` for the original nodes, `t = 0..=steps`.
pub fn mean_field(aug: &AugmentedNetwork, seeds: &SeedSet, mode: ModelMode, z: Option<&[f64]>, steps: usize) -> Result<Vec<Vec<f64>>> {
    let kernel = Kernel::new(aug, mode)?;
    let n_raw = aug.n_raw();
    let mut u: Vec<f64> = match z {
        Some(z) if z.len() == n_raw => z.to_vec(),
        Some(_) => return Err(Error::validation("initial values must have one entry per node")),
        None => vec![0.0; n_raw],
    };
    for s in seeds.iter() {
        u[s] = 1.0;
    }
    let b = aug.bias_value();
    let mut out = vec![u.clone()];
    for _ in 0..steps {
        let next: Vec<f64> = (0..n_raw)
            .map(|i| if seeds.contains(i) { 1.0 } else { kernel.probability(i, |j| u[j], b) })
            .collect();
        u = next;
        out.push(u.clone());
    }
    Ok(out)
}

/// HC parameters equivalent to a non-progressive LT instance: the weight gap
/// `g_i = 1 - sum_j w_ij` becomes the bias strength (with `b = 0`) and the
/// remaining weights are renormalized by the augmentation.
pub fn nlt_to_hc(nlt: &Network) -> Result<Network> {
    let mut beta = vec![0.0; nlt.n_raw()];
    for (i, b) in beta.iter_mut().enumerate() {
        let total: f64 = nlt.out_edges(i).iter().map(|e| e.weight).sum();
        if total > 1.0 + STOCHASTIC_TOL {
            return Err(Error::validation(format!("NLT weights of node {i} sum to {total} > 1")));
        }
        if total > 0.0 {
            *b = (1.0 - total).max(0.0);
        }
    }
    nlt.clone().with_beta(beta)
}

/// HC parameters of binary GLT: uniform bias strength `beta` and bias value
/// 1/2, giving the choice rule `beta / 2 + (1 - beta) sum_j w_ij delta_j`.
pub fn glt_binary_to_hc(net: &Network, beta: f64) -> Result<(Network, f64)> {
    Ok((net.clone().with_uniform_beta(beta)?, GLT_BIAS_VALUE))
}

fn initial_states(n_raw: usize, seeds: &SeedSet, z: Option<&[f64]>, rng: &mut impl Rng) -> Vec<bool> {
    (0..n_raw)
        .map(|i| seeds.contains(i) || z.is_some_and(|z| z[i] > 0.0 && rng.random::<f64>() < z[i]))
        .collect()
}

fn direct_frequencies(
    n_raw: usize,
    seeds: &SeedSet,
    z: Option<&[f64]>,
    horizon: usize,
    runs: usize,
    rng_seed: u64,
    step: impl Fn(usize, &[bool], &mut ChaCha8Rng) -> bool + Sync,
) -> Vec<f64> {
    let pinned: Vec<bool> = (0..n_raw).map(|i| seeds.contains(i)).collect();
    let totals = (0..runs as u64)
        .into_par_iter()
        .fold(
            || vec![0u64; n_raw],
            |mut acc, r| {
                let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
                rng.set_stream(r);
                let mut cur = initial_states(n_raw, seeds, z, &mut rng);
                let mut next = vec![false; n_raw];
                for _ in 0..horizon {
                    for i in 0..n_raw {
                        next[i] = pinned[i] || step(i, &cur, &mut rng);
                    }
                    std::mem::swap(&mut cur, &mut next);
                }
                for (a, &on) in acc.iter_mut().zip(&cur) {
                    *a += on as u64;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; n_raw],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    totals.into_iter().map(|c| c as f64 / runs as f64).collect()
}

/// Simulates non-progressive LT directly on its own weights: node `i`
/// becomes active iff `sum_j w_ij delta_j(t) >= theta_i(t+1)`, `theta ~ U(0,1]`.
/// Returns per-node adoption frequencies at `horizon`.
pub fn simulate_nlt_direct(
    nlt: &Network,
    seeds: &SeedSet,
    z: Option<&[f64]>,
    horizon: usize,
    runs: usize,
    rng_seed: u64,
) -> Result<Vec<f64>> {
    nlt_to_hc(nlt)?;
    Ok(direct_frequencies(nlt.n_raw(), seeds, z, horizon, runs, rng_seed, |i, cur, rng| {
        let mass: f64 = nlt.out_edges(i).iter().filter(|e| cur[e.dst]).map(|e| e.weight).sum();
        mass > 0.0 && mass >= 1.0 - rng.random::<f64>()
    }))
}

/// Simulates two-color GLT directly: with probability `beta` a node takes a
/// uniformly random color, otherwise it copies a neighbor picked by weight.
/// Every node needs at least one neighbor.
pub fn simulate_glt_binary_direct(
    net: &Network,
    beta: f64,
    seeds: &SeedSet,
    z: Option<&[f64]>,
    horizon: usize,
    runs: usize,
    rng_seed: u64,
) -> Result<Vec<f64>> {
    if let Some(i) = (0..net.n_raw()).find(|&i| net.out_degree(i) == 0) {
        return Err(Error::validation(format!("GLT needs every node to have a neighbor (node {i})")));
    }
    let totals: Vec<f64> = (0..net.n_raw())
        .map(|i| net.out_edges(i).iter().map(|e| e.weight).sum())
        .collect();
    Ok(direct_frequencies(net.n_raw(), seeds, z, horizon, runs, rng_seed, |i, cur, rng| {
        if rng.random::<f64>() < beta {
            return rng.random::<bool>();
        }
        let mut u = rng.random::<f64>() * totals[i];
        let out = net.out_edges(i);
        for e in out {
            if u < e.weight {
                return cur[e.dst];
            }
            u -= e.weight;
        }
        cur[out.last().unwrap().dst]
    }))
}
