use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hc_influence::experiment::{
    build_network, compare_backends, evaluate_spread, run_experiment, timing_harness, ExperimentConfig,
    ResultTable,
};
use hc_influence::generators::{
    generate_forest_fire, generate_kronecker, ForestFireSpec, KroneckerSpec, DEFAULT_DIAMETER_QUANTILE,
    DEFAULT_DIAMETER_SAMPLES,
};
use hc_influence::graph::{augment_with_bias, edge_list_string, load_edge_list, Network, SeedSet, Weighting};
use hc_influence::maximize::{select, Algorithm, McParams, SelectOptions, DEFAULT_BRUTE_FORCE_CAP};
use hc_influence::simulate::{mean_field, ModelMode, MonteCarlo};
use hc_influence::{Error, Result};

#[derive(Parser)]
#[command(name = "hcim", version, about = "Influence maximization under the heat-conduction model")]
struct Cli {
    /// JSON experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (generate, simulate, maximize) or directory (experiment, compare-backends, timing).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads, 0 = one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// RNG seed, overriding the config's `rng_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic network as a weighted edge list.
    Generate(GenerateArgs),
    /// Monte Carlo and mean-field trajectories of the binary cascade.
    Simulate(SimulateArgs),
    /// Select seeds and print the per-step trace.
    Maximize(MaximizeArgs),
    /// Run every configured algorithm for k = 1..K.
    Experiment,
    /// c2greedy under the dense backend against a sweep of series lengths.
    CompareBackends,
    /// Wall-clock and evaluation counts of c2greedy against simulation greedy.
    Timing,
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    Kronecker,
    ForestFire,
}

#[derive(Clone, Copy, ValueEnum)]
enum Initiator {
    Random,
    Hierarchical,
    CorePeriphery,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    model: Generator,
    #[arg(long, value_enum, default_value = "core-periphery")]
    initiator: Initiator,
    /// Kronecker graphs have 2^power nodes.
    #[arg(long, default_value_t = 10)]
    power: u32,
    /// Forest-fire node count.
    #[arg(long, default_value_t = 1000)]
    nodes: usize,
    #[arg(long, default_value_t = 0.35)]
    p_forward: f64,
    #[arg(long, default_value_t = 0.25)]
    p_backward: f64,
}

#[derive(Args)]
struct NetworkArgs {
    /// Edge list `src dst [weight]`; overrides the config's network.
    #[arg(long)]
    edges: Option<PathBuf>,
    #[arg(long, default_value = "inverse_out_degree")]
    weighting: String,
    /// Uniform bias strength when reading `--edges`.
    #[arg(long, default_value_t = hc_influence::graph::DEFAULT_BETA)]
    beta: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    network: NetworkArgs,
    /// Comma-separated seed nodes.
    #[arg(long, default_value = "")]
    seeds: String,
    /// `hc`, `hc_general[:media:reluctance]`, `voter`, `nlt` or `glt:<beta>`.
    #[arg(long, default_value = "hc")]
    mode: String,
    /// Bias value.
    #[arg(long, default_value_t = 0.0)]
    b: f64,
    /// Initial adoption probability of every non-seed node.
    #[arg(long)]
    initial: Option<f64>,
    #[arg(long, default_value_t = 50)]
    horizon: usize,
    #[arg(long, default_value_t = 1000)]
    runs: usize,
}

#[derive(Args)]
struct MaximizeArgs {
    #[command(flatten)]
    network: NetworkArgs,
    #[arg(long, default_value = "c2greedy")]
    algo: String,
    #[arg(long)]
    k: usize,
    /// `dense`, `auto`, `neumann:<T>` or `neumann:auto`.
    #[arg(long, default_value = "auto")]
    backend: String,
    #[arg(long, default_value_t = 100)]
    runs: usize,
    /// Monte Carlo horizon, default 10 x effective diameter.
    #[arg(long)]
    horizon: Option<usize>,
}

fn exit_code(err: &Error) -> u8 {
    match err.root() {
        Error::Config(_) => 2,
        Error::Capacity(_) => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("error: thread pool: {e}");
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(args) => generate(cli, args),
        Command::Simulate(args) => simulate(cli, args),
        Command::Maximize(args) => maximize(cli, args),
        Command::Experiment => tabulate(cli, run_experiment),
        Command::CompareBackends => tabulate(cli, compare_backends),
        Command::Timing => tabulate(cli, timing_harness),
    }
}

fn load_config(cli: &Cli) -> Result<Option<ExperimentConfig>> {
    let Some(path) = &cli.config else { return Ok(None) };
    let mut config = ExperimentConfig::from_file(path)?;
    if let Some(seed) = cli.seed {
        config.rng_seed = seed;
    }
    Ok(Some(config))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| io_error(path, e)),
        None => io::stdout().write_all(bytes).map_err(|e| io_error("<stdout>", e)),
    }
}

fn io_error(path: impl Into<PathBuf>, source: io::Error) -> Error {
    Error::Io {
        path: path.into(),
        source,
    }
}

fn generate(cli: &Cli, args: &GenerateArgs) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    let net = match args.model {
        Generator::Kronecker => {
            let initiator = match args.initiator {
                Initiator::Random => KroneckerSpec::RANDOM,
                Initiator::Hierarchical => KroneckerSpec::HIERARCHICAL,
                Initiator::CorePeriphery => KroneckerSpec::CORE_PERIPHERY,
            };
            generate_kronecker(&KroneckerSpec::new(initiator, args.power, seed))?
        }
        Generator::ForestFire => {
            generate_forest_fire(&ForestFireSpec::new(args.nodes, args.p_forward, args.p_backward, seed))?
        }
    };
    emit(cli.out.as_deref(), edge_list_string(&net).as_bytes())
}

/// Network from `--edges`, else from the config.
fn network(cli: &Cli, args: &NetworkArgs) -> Result<(Network, Option<ExperimentConfig>)> {
    let config = load_config(cli)?;
    if let Some(path) = &args.edges {
        let weighting: Weighting = args.weighting.parse()?;
        let net = load_edge_list(path, weighting, cli.seed.unwrap_or(0))?.with_uniform_beta(args.beta)?;
        return Ok((net, config));
    }
    match config {
        Some(c) => Ok((build_network(&c)?, Some(c))),
        None => Err(Error::Config("give --edges or --config".into())),
    }
}

fn parse_seed_list(s: &str) -> Result<SeedSet> {
    let members = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::Config(format!("bad seed `{t}`"))))
        .collect::<Result<Vec<usize>>>()?;
    SeedSet::new(members)
}

fn simulate(cli: &Cli, args: &SimulateArgs) -> Result<()> {
    let (net, _) = network(cli, &args.network)?;
    let mode: ModelMode = args.mode.parse()?;
    let aug = augment_with_bias(&net, args.b)?;
    let seeds = parse_seed_list(&args.seeds)?;
    let z = args.initial.map(|p| vec![p; aug.n_raw()]);
    let mut mc = MonteCarlo::new(&aug, mode, args.horizon, args.runs, cli.seed.unwrap_or(0))?;
    if let Some(z) = &z {
        mc = mc.with_initial(z.clone())?;
    }
    let trajectory = mc.trajectory(&seeds)?;
    let mf = mean_field(&aug, &seeds, mode, z.as_deref(), args.horizon)?;
    let mut text = String::from("t,mc_mean,mc_stderr,mean_field\n");
    for (point, u) in trajectory.iter().zip(&mf) {
        let expected: f64 = u.iter().sum();
        text.push_str(&format!("{},{},{},{}\n", point.t, point.mean_active, point.stderr, expected));
    }
    emit(cli.out.as_deref(), text.as_bytes())
}

fn maximize(cli: &Cli, args: &MaximizeArgs) -> Result<()> {
    let (net, config) = network(cli, &args.network)?;
    let algo: Algorithm = args.algo.parse()?;
    let aug = augment_with_bias(&net, 0.0)?;
    let backend = args
        .backend
        .parse::<hc_influence::experiment::BackendSpec>()
        .map_err(|e| Error::Config(e.to_string()))?
        .resolve(&aug);
    let rng_seed = cli.seed.or(config.as_ref().map(|c| c.rng_seed)).unwrap_or(0);
    let horizon = match args.horizon {
        Some(h) => h,
        None => {
            let d = hc_influence::generators::estimate_effective_diameter(
                &net,
                DEFAULT_DIAMETER_SAMPLES,
                DEFAULT_DIAMETER_QUANTILE,
                rng_seed,
            )
            .unwrap_or(1);
            10 * d.max(1)
        }
    };
    let opts = SelectOptions {
        backend,
        mc: McParams {
            runs: args.runs,
            horizon,
            rng_seed,
        },
        rng_seed,
        brute_force_cap: config.as_ref().map_or(DEFAULT_BRUTE_FORCE_CAP, |c| c.brute_force_cap),
    };
    let trace = select(&aug, args.k, algo, &opts)?;
    let members = trace.seeds().members().to_vec();

    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(["step", "seed", "label", "marginal_gain", "sigma", "elapsed_ms", "evals"])?;
    let mut previous = 0.0;
    for (idx, step) in trace.steps.iter().enumerate() {
        let sigma = evaluate_spread(&aug, &SeedSet::new(members[..=idx].to_vec())?)?;
        out.write_record([
            (idx + 1).to_string(),
            step.seed.to_string(),
            net.label(step.seed),
            (sigma - previous).to_string(),
            sigma.to_string(),
            (step.elapsed.as_secs_f64() * 1e3).to_string(),
            step.evaluations.to_string(),
        ])?;
        previous = sigma;
    }
    let bytes = out.into_inner().map_err(|e| io_error("<csv>", e.into_error()))?;
    emit(cli.out.as_deref(), &bytes)
}

fn tabulate(cli: &Cli, runner: fn(&ExperimentConfig) -> Result<ResultTable>) -> Result<()> {
    let mut config = load_config(cli)?.ok_or_else(|| Error::Config("this command needs --config".into()))?;
    if let Some(dir) = &cli.out {
        config.output_dir = Some(dir.clone());
    }
    let table = runner(&config)?;
    if config.output_dir.is_none() {
        let [(_, results), ..] = table.to_csv_strings()?;
        emit(None, &results)?;
    }
    Ok(())
}
