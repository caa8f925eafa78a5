//! Experiment configuration, orchestration and CSV results.
//!
//! A run writes three files into its output directory:
//!
//! - `results.csv`: one row per (algorithm, backend, k), deterministic for a
//!   fixed config and seed;
//! - `timings.csv`: wall-clock time of the step that added the k-th seed;
//! - `environment.csv`: crate version, seed and backend.
//!
//! Every file is written to a temporary sibling and renamed into place, so a
//! directory never holds a partial CSV.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{
    estimate_effective_diameter, generate_forest_fire, generate_kronecker, ForestFireSpec, KroneckerSpec,
    DEFAULT_DIAMETER_QUANTILE, DEFAULT_DIAMETER_SAMPLES,
};
use crate::graph::{augment_with_bias, load_beta_file, load_edge_list, AugmentedNetwork, Network, SeedSet, Weighting, DEFAULT_BETA};
use crate::maximize::{c2greedy, online_bound, select, Algorithm, GreedyTrace, McParams, SelectOptions, DEFAULT_BRUTE_FORCE_CAP};
use crate::spread::{steady_state_iterative, Backend};

pub const RESULTS_FILE: &str = "results.csv";
pub const TIMINGS_FILE: &str = "timings.csv";
pub const ENVIRONMENT_FILE: &str = "environment.csv";

/// Solver tolerance for the spread reported in result tables.
const EVAL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NetworkSource {
    Kronecker(KroneckerSpec),
    ForestFire(ForestFireSpec),
    EdgeList {
        path: PathBuf,
        #[serde(default = "default_weighting")]
        weighting: Weighting,
    },
}

fn default_weighting() -> Weighting {
    Weighting::InverseOutDegree
}

/// Bias strength: one value for every node, or a file with one value per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaSpec {
    Uniform(f64),
    File { file: PathBuf },
}

impl Default for BetaSpec {
    fn default() -> Self {
        BetaSpec::Uniform(DEFAULT_BETA)
    }
}

/// `dense`, `auto`, `neumann:<T>` or `neumann:auto` (T = effective diameter).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BackendSpec {
    Dense,
    #[default]
    Auto,
    Neumann(Option<usize>),
}

impl BackendSpec {
    pub fn resolve(self, aug: &AugmentedNetwork) -> Backend {
        match self {
            BackendSpec::Dense => Backend::Dense,
            BackendSpec::Auto => Backend::Auto.resolve(aug),
            BackendSpec::Neumann(Some(terms)) => Backend::Neumann { terms },
            BackendSpec::Neumann(None) => Backend::Neumann {
                terms: crate::spread::default_series_terms(aug),
            },
        }
    }
}

impl FromStr for BackendSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(BackendSpec::Dense),
            "auto" => Ok(BackendSpec::Auto),
            "neumann:auto" => Ok(BackendSpec::Neumann(None)),
            _ => match s.parse::<Backend>()? {
                Backend::Neumann { terms } => Ok(BackendSpec::Neumann(Some(terms))),
                _ => unreachable!("dense and auto handled above"),
            },
        }
    }
}

impl TryFrom<String> for BackendSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for BackendSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendSpec::Dense => write!(f, "dense"),
            BackendSpec::Auto => write!(f, "auto"),
            BackendSpec::Neumann(None) => write!(f, "neumann:auto"),
            BackendSpec::Neumann(Some(t)) => write!(f, "neumann:{t}"),
        }
    }
}

impl From<BackendSpec> for String {
    fn from(b: BackendSpec) -> String {
        b.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoTag {
    Auto,
}

/// Monte Carlo horizon: fixed, or `auto` = 10 x effective diameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HorizonSpec {
    Steps(usize),
    Policy(AutoTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_horizon")]
    pub horizon: HorizonSpec,
}

fn default_runs() -> usize {
    100
}

fn default_horizon() -> HorizonSpec {
    HorizonSpec::Policy(AutoTag::Auto)
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            runs: default_runs(),
            horizon: default_horizon(),
        }
    }
}

fn default_cap() -> u64 {
    DEFAULT_BRUTE_FORCE_CAP
}

fn yes() -> bool {
    true
}

/// One experiment, read from a single strict JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub network: NetworkSource,
    #[serde(default)]
    pub beta: BetaSpec,
    /// Bias value for simulations; maximization always scores with `b = 0`.
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub backend: BackendSpec,
    pub algorithms: Vec<Algorithm>,
    pub k: usize,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Series lengths for [`compare_backends`]; defaults to `0..=2 x diameter`.
    #[serde(default)]
    pub t_sweep: Option<Vec<usize>>,
    #[serde(default = "default_cap")]
    pub brute_force_cap: u64,
    /// Whether to record the online-bound ratio at `k = K`.
    #[serde(default = "yes")]
    pub bounds: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file; relative paths inside it are taken relative to the file.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: Self = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let NetworkSource::EdgeList { path, .. } = &mut config.network {
            rebase(path);
        }
        if let BetaSpec::File { file } = &mut config.beta {
            rebase(file);
        }
        if let Some(dir) = &mut config.output_dir {
            rebase(dir);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.algorithms.is_empty() {
            return bad("at least one algorithm is required".into());
        }
        if !(0.0..=1.0).contains(&self.b) {
            return bad(format!("bias value b = {} outside [0, 1]", self.b));
        }
        if self.mc.runs == 0 {
            return bad("mc.runs must be at least 1".into());
        }
        if let NetworkSource::EdgeList { path, .. } = &self.network {
            if !path.is_file() {
                return bad(format!("edge list {} does not exist", path.display()));
            }
        }
        match &self.beta {
            BetaSpec::File { file } if !file.is_file() => bad(format!("beta file {} does not exist", file.display())),
            BetaSpec::Uniform(b) if !(0.0..1.0).contains(b) => bad(format!("beta = {b} outside [0, 1)")),
            _ => Ok(()),
        }
    }
}

/// Network, augmentation and resolved settings shared by all experiment kinds.
pub struct Prepared {
    pub network: Network,
    pub aug: AugmentedNetwork,
    pub backend: Backend,
    pub options: SelectOptions,
}

pub fn build_network(config: &ExperimentConfig) -> Result<Network> {
    let net = match &config.network {
        NetworkSource::Kronecker(spec) => generate_kronecker(spec)?,
        NetworkSource::ForestFire(spec) => generate_forest_fire(spec)?,
        NetworkSource::EdgeList { path, weighting } => load_edge_list(path, *weighting, config.rng_seed)?,
    };
    match &config.beta {
        BetaSpec::Uniform(b) => net.with_uniform_beta(*b),
        BetaSpec::File { file } => {
            let beta = load_beta_file(file, net.n_raw())?;
            net.with_beta(beta)
        }
    }
}

pub fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    config.validate()?;
    let network = build_network(config).map_err(|e| e.in_stage("network"))?;
    let aug = augment_with_bias(&network, 0.0).map_err(|e| e.in_stage("augment"))?;
    if config.k > aug.n_raw() {
        return Err(Error::Config(format!("k = {} exceeds the {} nodes", config.k, aug.n_raw())));
    }
    let backend = config.backend.resolve(&aug);
    let horizon = match config.mc.horizon {
        HorizonSpec::Steps(h) => h,
        HorizonSpec::Policy(AutoTag::Auto) => {
            let d = estimate_effective_diameter(&network, DEFAULT_DIAMETER_SAMPLES, DEFAULT_DIAMETER_QUANTILE, config.rng_seed)
                .unwrap_or(1);
            10 * d.max(1)
        }
    };
    let options = SelectOptions {
        backend,
        mc: McParams {
            runs: config.mc.runs,
            horizon,
            rng_seed: config.rng_seed,
        },
        rng_seed: config.rng_seed,
        brute_force_cap: config.brute_force_cap,
    };
    Ok(Prepared {
        network,
        aug,
        backend,
        options,
    })
}

/// Spread of `seeds` as reported in every table: the closed form, solved
/// iteratively on the sparse system.
pub fn evaluate_spread(aug: &AugmentedNetwork, seeds: &SeedSet) -> Result<f64> {
    Ok(steady_state_iterative(aug, seeds, None, EVAL_TOL)?.sigma)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub algorithm: String,
    pub backend: String,
    pub k: usize,
    /// Seed set of size `k`, space separated, in selection order.
    pub seeds: String,
    pub sigma: f64,
    /// Evaluations spent on the step that produced this row.
    pub evals: u64,
    pub bound_ratio: Option<f64>,
    pub matches_dense: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub algorithm: String,
    pub backend: String,
    pub k: usize,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    pub rng_seed: u64,
    pub backend: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    pub timings: Vec<TimingRow>,
    pub environment: Environment,
}

fn seeds_string(members: &[usize]) -> String {
    members.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
}

/// Parses the `seeds` column back into node indices.
pub fn parse_seeds(s: &str) -> Result<Vec<usize>> {
    s.split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::validation(format!("bad seed `{t}`"))))
        .collect()
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn csv_bytes<T: Serialize>(records: &[T], header: &[&str]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    if records.is_empty() {
        w.write_record(header)?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::validation(e.to_string()))
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|rec| rec.map_err(Error::from)).collect()
}

impl ResultTable {
    fn new(environment: Environment) -> Self {
        Self {
            rows: Vec::new(),
            timings: Vec::new(),
            environment,
        }
    }

    pub fn to_csv_strings(&self) -> Result<[(String, Vec<u8>); 3]> {
        let results = csv_bytes(
            &self.rows,
            &["algorithm", "backend", "k", "seeds", "sigma", "evals", "bound_ratio", "matches_dense"],
        )?;
        let timings = csv_bytes(&self.timings, &["algorithm", "backend", "k", "elapsed_ms"])?;
        let env = csv_bytes(std::slice::from_ref(&self.environment), &[])?;
        Ok([
            (RESULTS_FILE.to_string(), results),
            (TIMINGS_FILE.to_string(), timings),
            (ENVIRONMENT_FILE.to_string(), env),
        ])
    }

    /// Writes the three CSVs atomically. On failure no file of this call is left behind.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = self.to_csv_strings()?;
        let mut staged = Vec::with_capacity(files.len());
        for (name, bytes) in &files {
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
            tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
            tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
            staged.push((tmp, dir.join(name)));
        }
        let mut placed: Vec<PathBuf> = Vec::new();
        for (tmp, target) in staged {
            if let Err(e) = tmp.persist(&target) {
                for p in &placed {
                    let _ = fs::remove_file(p);
                }
                return Err(Error::io(target, e.error));
            }
            placed.push(target);
        }
        Ok(())
    }

    pub fn read(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let rows = read_csv(&dir.join(RESULTS_FILE))?;
        let timings = read_csv(&dir.join(TIMINGS_FILE))?;
        let mut env: Vec<Environment> = read_csv(&dir.join(ENVIRONMENT_FILE))?;
        let environment = env
            .pop()
            .ok_or_else(|| Error::validation(format!("{} has no rows", ENVIRONMENT_FILE)))?;
        Ok(Self {
            rows,
            timings,
            environment,
        })
    }

    /// Rows of one algorithm, ascending in `k`.
    pub fn rows_for<'a>(&'a self, algorithm: &'a str) -> impl Iterator<Item = &'a ResultRow> + 'a {
        self.rows.iter().filter(move |r| r.algorithm == algorithm)
    }

    fn push_trace(&mut self, aug: &AugmentedNetwork, trace: &GreedyTrace, dense: Option<&[usize]>) -> Result<()> {
        let members = trace.seeds().members().to_vec();
        for (idx, step) in trace.steps.iter().enumerate() {
            let k = idx + 1;
            let prefix = &members[..k];
            let sigma = evaluate_spread(aug, &SeedSet::new(prefix.to_vec())?)?;
            let matches_dense = dense.map(|d| {
                let (mut a, mut b) = (prefix.to_vec(), d[..k.min(d.len())].to_vec());
                a.sort_unstable();
                b.sort_unstable();
                a == b
            });
            self.rows.push(ResultRow {
                algorithm: trace.algorithm.clone(),
                backend: trace.backend.clone(),
                k,
                seeds: seeds_string(prefix),
                sigma,
                evals: step.evaluations,
                bound_ratio: None,
                matches_dense,
            });
            self.timings.push(TimingRow {
                algorithm: trace.algorithm.clone(),
                backend: trace.backend.clone(),
                k,
                elapsed_ms: ms(step.elapsed),
            });
        }
        Ok(())
    }
}

fn environment(config: &ExperimentConfig, backend: Backend) -> Environment {
    Environment {
        version: env!("CARGO_PKG_VERSION").to_string(),
        rng_seed: config.rng_seed,
        backend: backend.to_string(),
    }
}

fn finish(config: &ExperimentConfig, table: ResultTable) -> Result<ResultTable> {
    if let Some(dir) = &config.output_dir {
        table.write(dir).map_err(|e| e.in_stage("write"))?;
    }
    Ok(table)
}

fn run_algorithms(config: &ExperimentConfig, prep: &Prepared, bounds: bool) -> Result<ResultTable> {
    let mut table = ResultTable::new(environment(config, prep.backend));
    for &algo in &config.algorithms {
        let stage = || format!("select:{algo}");
        if algo.is_incremental() {
            let trace = select(&prep.aug, config.k, algo, &prep.options).map_err(|e| e.in_stage(stage()))?;
            table.push_trace(&prep.aug, &trace, None).map_err(|e| e.in_stage("evaluate"))?;
            if bounds {
                let report = online_bound(&prep.aug, &trace, prep.backend).map_err(|e| e.in_stage("bounds"))?;
                table.rows.last_mut().expect("k >= 1").bound_ratio = Some(report.ratio);
            }
        } else {
            for k in 1..=config.k {
                let trace = select(&prep.aug, k, algo, &prep.options).map_err(|e| e.in_stage(stage()))?;
                let members = trace.seeds();
                let sigma = evaluate_spread(&prep.aug, &members).map_err(|e| e.in_stage("evaluate"))?;
                table.rows.push(ResultRow {
                    algorithm: algo.to_string(),
                    backend: trace.backend.clone(),
                    k,
                    seeds: seeds_string(members.members()),
                    sigma,
                    evals: crate::maximize::binomial_count(prep.aug.n_raw(), k),
                    bound_ratio: None,
                    matches_dense: None,
                });
                table.timings.push(TimingRow {
                    algorithm: algo.to_string(),
                    elapsed_ms: ms(trace.total_elapsed()),
                    backend: trace.backend,
                    k,
                });
            }
        }
    }
    Ok(table)
}

/// Every configured algorithm for `k = 1..=K`, every seed set scored by [`evaluate_spread`].
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    let prep = prepare(config)?;
    let table = run_algorithms(config, &prep, config.bounds)?;
    finish(config, table)
}

/// c2greedy under the dense backend and under the truncated series for each
/// `T` in the sweep, with a flag for whether each seed set equals the dense one.
pub fn compare_backends(config: &ExperimentConfig) -> Result<ResultTable> {
    let prep = prepare(config)?;
    let aug = &prep.aug;
    let mut table = ResultTable::new(environment(config, Backend::Dense));
    let dense = c2greedy(aug, config.k, Backend::Dense).map_err(|e| e.in_stage("select:c2greedy dense"))?;
    let dense_seeds = dense.seeds().members().to_vec();
    table.push_trace(aug, &dense, None).map_err(|e| e.in_stage("evaluate"))?;
    let sweep = match &config.t_sweep {
        Some(s) => s.clone(),
        None => (0..=2 * crate::spread::default_series_terms(aug)).collect(),
    };
    for terms in sweep {
        let trace = c2greedy(aug, config.k, Backend::Neumann { terms })
            .map_err(|e| e.in_stage(format!("select:c2greedy neumann:{terms}")))?;
        table.push_trace(aug, &trace, Some(&dense_seeds)).map_err(|e| e.in_stage("evaluate"))?;
    }
    finish(config, table)
}

/// Wall-clock and evaluation counts per step for c2greedy against the
/// evaluation-based greedy variants.
pub fn timing_harness(config: &ExperimentConfig) -> Result<ResultTable> {
    let algos = &config.algorithms;
    let evaluation_based = [
        Algorithm::Greedy,
        Algorithm::LazyGreedy,
        Algorithm::C1Greedy,
        Algorithm::LazyC1Greedy,
    ];
    if !algos.contains(&Algorithm::C2Greedy) || !algos.iter().any(|a| evaluation_based.contains(a)) {
        return Err(Error::Config(
            "timing needs c2greedy and at least one of greedy, lazy_greedy, c1greedy, lazy_c1greedy".into(),
        ));
    }
    let prep = prepare(config)?;
    let table = run_algorithms(config, &prep, false)?;
    finish(config, table)
}
