//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run a subset with `cargo test --test acceptance -- 3 7`.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use hc_influence::generators::{
    estimate_effective_diameter, generate_forest_fire, generate_kronecker, ForestFireSpec, KroneckerSpec,
    DEFAULT_DIAMETER_QUANTILE, DEFAULT_DIAMETER_SAMPLES,
};
use hc_influence::graph::{augment_with_bias, build_transition_system, AugmentedNetwork, Network, SeedSet};
use hc_influence::maximize::{
    baseline_select, brute_force, c2greedy, mc_greedy, mc_greedy_within, Baseline, McParams, McVariant, DEFAULT_BRUTE_FORCE_CAP,
};
use hc_influence::simulate::{
    glt_binary_to_hc, mc_spread_estimate, mean_field, nlt_to_hc, simulate_glt_binary_direct, simulate_nlt_direct,
    ModelMode,
};
use hc_influence::spread::{
    absorption_from_fundamental, compute_fundamental_dense, influence_spread, new_seed_absorption,
    update_fundamental_rank1, Backend,
};
use hc_influence::experiment::evaluate_spread;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BETA: f64 = 0.1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Criterion = fn() -> Outcome;

const CRITERIA: [(&str, &str, Criterion); 10] = [
    ("1", "greedy matches brute force on the karate club", brute_force_match),
    ("2", "(1 - 1/e) guarantee on random 12-node networks", approximation_guarantee),
    ("3", "closed form agrees with Monte Carlo on Kronecker graphs", closed_form_vs_monte_carlo),
    ("4", "fundamental-matrix identities on 200-node networks", fundamental_identities),
    ("5", "Neumann backend reproduces dense seeds on forest fire", neumann_convergence),
    ("6", "spread is submodular and monotone", submodularity_suite),
    ("7", "closed-form greedy outpaces Monte Carlo greedy", timing_ordering),
    ("8", "c2greedy beats degree beats random on core-periphery", baseline_ordering),
    ("9", "Neumann c2greedy scales to 300k nodes", scalability),
    ("10", "voter, NLT and GLT reductions", unification),
];

fn main() -> ExitCode {
    let wanted: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, check) in CRITERIA {
        if !wanted.is_empty() && !wanted.iter().any(|w| w == id) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let tag = if result.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} criterion {id:>2}: {name} [{}] ({:.1}s)",
            result.detail,
            start.elapsed().as_secs_f64()
        );
        failed += !result.pass as usize;
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

fn hc(net: &Network) -> AugmentedNetwork {
    augment_with_bias(&net.clone().with_uniform_beta(BETA).unwrap(), 0.0).unwrap()
}

fn diameter(net: &Network) -> usize {
    estimate_effective_diameter(net, DEFAULT_DIAMETER_SAMPLES, DEFAULT_DIAMETER_QUANTILE, 0)
        .unwrap()
        .max(1)
}

fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn brute_force_match() -> Outcome {
    let start = Instant::now();
    let aug = augment_with_bias(&common::karate_club(), 0.0).unwrap();
    let trace = c2greedy(&aug, 5, Backend::Dense).unwrap();
    let mut worst = f64::INFINITY;
    for k in 1..=5 {
        let (_, best) = brute_force(&aug, k, DEFAULT_BRUTE_FORCE_CAP).unwrap();
        let sigma = influence_spread(&aug, &trace.seeds().prefix(k), Backend::Dense).unwrap();
        worst = worst.min(sigma / best);
    }
    let elapsed = start.elapsed();
    outcome(
        worst >= 0.99 && elapsed < Duration::from_secs(300),
        format!("worst ratio {worst:.5}, {:.1}s", elapsed.as_secs_f64()),
    )
}

fn approximation_guarantee() -> Outcome {
    let bound = 1.0 - 1.0 / std::f64::consts::E;
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for seed in 0..20 {
        let p = 0.1 + 0.02 * seed as f64;
        let aug = common::random_aug(12, p, 1000 + seed);
        let sigma = c2greedy(&aug, 3, Backend::Dense).unwrap().sigma();
        let (_, best) = brute_force(&aug, 3, DEFAULT_BRUTE_FORCE_CAP).unwrap();
        worst = worst.min(sigma / best);
        violations += (sigma < bound * best) as usize;
    }
    outcome(violations == 0, format!("{violations} violations, worst ratio {worst:.4}"))
}

fn closed_form_vs_monte_carlo() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let initiators = [
        ("random", KroneckerSpec::RANDOM),
        ("hierarchical", KroneckerSpec::HIERARCHICAL),
        ("core-periphery", KroneckerSpec::CORE_PERIPHERY),
    ];
    for (name, initiator) in initiators {
        let net = generate_kronecker(&KroneckerSpec::new(initiator, 10, 7)).unwrap();
        let aug = hc(&net);
        let horizon = 10 * diameter(&net);
        let seeds = c2greedy(&aug, 5, Backend::Dense).unwrap().seeds();
        let closed = influence_spread(&aug, &seeds, Backend::Dense).unwrap();
        let mc = mc_spread_estimate(&aug, &seeds, ModelMode::Hc, horizon, 20_000, 11).unwrap();
        let tol = (0.02 * closed).max(3.0 * mc.stderr);
        let ok = (mc.mean - closed).abs() <= tol;
        pass &= ok;
        parts.push(format!("{name}: closed {closed:.3} mc {:.3}±{:.3}", mc.mean, mc.stderr));
    }
    outcome(pass, parts.join("; "))
}

fn fundamental_identities() -> Outcome {
    let start = Instant::now();
    let (mut rank1, mut identity, mut lemma) = (0.0f64, 0.0f64, 0.0f64);
    for seed in 0..50u64 {
        let aug = common::random_aug(200, 0.01 + 0.0004 * seed as f64, 5000 + seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chain = index::sample(&mut rng, 200, 5).into_vec();
        let mut f = compute_fundamental_dense(&build_transition_system(&aug, &SeedSet::empty()).unwrap()).unwrap();
        for k in 0..chain.len() {
            let s = chain[k];
            let column = new_seed_absorption(&f, s).unwrap();
            let interior_before = f.interior().to_vec();
            f = update_fundamental_rank1(&f, s).unwrap();
            let ts = build_transition_system(&aug, &SeedSet::new(chain[..=k].to_vec()).unwrap()).unwrap();
            let fresh = compute_fundamental_dense(&ts).unwrap();
            identity = identity.max(fresh.identity_residual(&ts).unwrap());
            let (a, b) = (f.to_rows().unwrap(), fresh.to_rows().unwrap());
            for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
                rank1 = rank1.max((x - y).abs());
            }
            let q = absorption_from_fundamental(&fresh, &ts).unwrap();
            for (&i, &x) in interior_before.iter().zip(&column) {
                let expect = if i == s { 1.0 } else { q.get(i, s).unwrap() };
                lemma = lemma.max((x - expect).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        rank1 < 1e-9 && identity < 1e-9 && lemma < 1e-9 && elapsed < Duration::from_secs(60),
        format!(
            "rank-1 {rank1:.1e}, F = I + FR {identity:.1e}, absorption column {lemma:.1e}, {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn same_set(a: &SeedSet, b: &SeedSet) -> bool {
    let (mut x, mut y) = (a.members().to_vec(), b.members().to_vec());
    x.sort_unstable();
    y.sort_unstable();
    x == y
}

fn neumann_convergence() -> Outcome {
    let net = generate_forest_fire(&ForestFireSpec::new(5000, 0.35, 0.25, 3)).unwrap();
    let aug = hc(&net);
    let d = diameter(&net);
    let full = estimate_effective_diameter(&net, DEFAULT_DIAMETER_SAMPLES, 1.0, 0).unwrap();
    let dense = c2greedy(&aug, 10, Backend::Dense).unwrap();
    let dense_sigma = evaluate_spread(&aug, &dense.seeds()).unwrap();
    let mut worst = 0.0f64;
    let mut matches = Vec::new();
    for terms in d..=2 * d {
        let seeds = c2greedy(&aug, 10, Backend::Neumann { terms }).unwrap().seeds();
        let sigma = evaluate_spread(&aug, &seeds).unwrap();
        worst = worst.max((sigma - dense_sigma).abs() / dense_sigma);
        matches.push((terms, same_set(&seeds, &dense.seeds())));
    }
    let at_d = matches[0].1;
    let first_stable = matches.iter().rposition(|&(_, m)| !m).map_or(d, |i| d + i + 1);
    outcome(
        at_d && worst <= 0.01,
        format!(
            "T = {d} (0.9 quantile): seeds match {at_d}; stable match from T = {first_stable}; \
             longest sampled shortest path {full}; worst relative sigma gap over T in {d}..={} is {worst:.2e}",
            2 * d
        ),
    )
}

fn submodularity_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let (mut dr_violations, mut mono_violations) = (0, 0);
    let mut worst = f64::INFINITY;
    for net_id in 0..20u64 {
        let aug = common::random_aug(100, 0.02 + 0.002 * net_id as f64, 7000 + net_id);
        let sig = |members: &[usize]| influence_spread(&aug, &SeedSet::new(members.to_vec()).unwrap(), Backend::Dense).unwrap();
        for _ in 0..50 {
            let size = rng.random_range(1..=8);
            let pool = index::sample(&mut rng, 100, size + 1).into_vec();
            let (s, large) = pool.split_last().unwrap();
            let small = &large[..rng.random_range(0..=large.len())];
            let with = |set: &[usize]| [set, &[*s]].concat();
            let gain_small = sig(&with(small)) - sig(small);
            let gain_large = sig(&with(large)) - sig(large);
            worst = worst.min(gain_small - gain_large);
            dr_violations += (gain_small < gain_large - 1e-9) as usize;

            let size = rng.random_range(0..=8);
            let pool = index::sample(&mut rng, 100, size + 1).into_vec();
            let (s, set) = pool.split_last().unwrap();
            mono_violations += (sig(&[set, &[*s]].concat()) < sig(set) - 1e-9) as usize;
        }
    }
    outcome(
        dr_violations == 0 && mono_violations == 0,
        format!(
            "1000 triples: {dr_violations} diminishing-returns violations (min slack {worst:.2e}); 1000 pairs: {mono_violations} monotonicity violations"
        ),
    )
}

fn timing_ordering() -> Outcome {
    let net = generate_forest_fire(&ForestFireSpec::new(1500, 0.35, 0.25, 5)).unwrap();
    let aug = hc(&net);
    let (n, k) = (aug.n_raw() as u64, 10u64);
    let mc = McParams {
        runs: 100,
        horizon: 10 * diameter(&net),
        rng_seed: 1,
    };
    // Per-step minimum over repeats damps scheduler noise in the millisecond-scale steps.
    let mut per_step = vec![Duration::MAX; k as usize];
    let mut c2 = None;
    for _ in 0..9 {
        let trace = c2greedy(&aug, k as usize, Backend::Dense).unwrap();
        for (slot, step) in per_step.iter_mut().zip(&trace.steps) {
            *slot = (*slot).min(step.elapsed);
        }
        c2 = Some(trace);
    }
    let c2 = c2.unwrap();
    let c2_time: Duration = per_step.iter().sum();

    // Plain greedy scores every remaining candidate each step. Its clock only
    // grows, so running it until it passes 50x the c2greedy time settles the
    // wall-clock comparison without the multi-hour full run.
    let plain_evals: u64 = (0..k).map(|r| n - r).sum();
    let plain = mc_greedy_within(&aug, k as usize, McVariant::Plain, &mc, 50 * c2_time + Duration::from_millis(1)).unwrap();
    let counted_ok = plain.trace.steps.iter().enumerate().all(|(r, s)| s.evaluations == n - r as u64);
    let lazy = mc_greedy(&aug, k as usize, McVariant::Lazy, &mc).unwrap();
    let c1 = mc_greedy(&aug, k as usize, McVariant::C1, &mc).unwrap();
    let lazy_c1 = mc_greedy(&aug, k as usize, McVariant::LazyC1, &mc).unwrap();

    let evals_ok = 50 * c2.total_evaluations() < plain_evals && counted_ok && c1.total_evaluations() == plain_evals;
    let time_ok = plain.elapsed > 50 * c2_time;
    let lazy_ok = lazy.total_evaluations() < plain_evals && lazy_c1.total_evaluations() < c1.total_evaluations();
    let worst_jitter = per_step
        .windows(2)
        .map(|w| w[1].as_secs_f64() / w[0].as_secs_f64())
        .fold(0.0, f64::max);
    let monotone_ok = worst_jitter <= 1.2;
    outcome(
        evals_ok && time_ok && lazy_ok && monotone_ok,
        format!(
            "evals c2 {} plain {plain_evals} lazy {} c1 {} lazy_c1 {}; c2 {:.3}s, plain passed {:.1}s after {} evaluations (complete: {}); \
             c2 per-step ms {:?}, worst step-to-step ratio {worst_jitter:.2}",
            c2.total_evaluations(),
            lazy.total_evaluations(),
            c1.total_evaluations(),
            lazy_c1.total_evaluations(),
            c2_time.as_secs_f64(),
            plain.elapsed.as_secs_f64(),
            plain.evaluations,
            plain.complete,
            per_step.iter().map(|d| (d.as_secs_f64() * 1e4).round() / 10.0).collect::<Vec<_>>(),
        ),
    )
}

fn baseline_ordering() -> Outcome {
    let (mut c2, mut degree, mut random) = (0.0, 0.0, 0.0);
    let instances = 10;
    for seed in 0..instances {
        let net = generate_kronecker(&KroneckerSpec::new(KroneckerSpec::CORE_PERIPHERY, 10, 100 + seed)).unwrap();
        let aug = hc(&net);
        c2 += evaluate_spread(&aug, &c2greedy(&aug, 30, Backend::Dense).unwrap().seeds()).unwrap();
        degree += evaluate_spread(&aug, &baseline_select(&aug, 30, Baseline::Degree, seed).unwrap()).unwrap();
        random += evaluate_spread(&aug, &baseline_select(&aug, 30, Baseline::Random, seed).unwrap()).unwrap();
    }
    let n = instances as f64;
    let (c2, degree, random) = (c2 / n, degree / n, random / n);
    outcome(
        c2 >= degree && degree >= random,
        format!("mean sigma c2greedy {c2:.2}, degree {degree:.2}, random {random:.2}"),
    )
}

fn scalability() -> Outcome {
    let start = Instant::now();
    let net = generate_forest_fire(&ForestFireSpec::new(300_000, 0.35, 0.25, 9)).unwrap();
    let density = net.edge_count() as f64 / net.n_raw() as f64;
    let aug = hc(&net);
    let d = diameter(&net);
    let setup = start.elapsed();
    let trace = c2greedy(&aug, 10, Backend::Neumann { terms: d }).unwrap();
    let elapsed = start.elapsed();
    let peak = peak_rss_bytes();
    let memory_ok = peak.is_some_and(|p| p < 16 << 30);
    outcome(
        trace.len() == 10 && elapsed < Duration::from_secs(3600) && memory_ok,
        format!(
            "density {density:.2}, T = {d}, setup {:.1}s, total {:.1}s on {} thread(s), peak RSS {}",
            setup.as_secs_f64(),
            elapsed.as_secs_f64(),
            rayon::current_num_threads(),
            peak.map_or("unknown".into(), |p| format!("{:.2} GiB", p as f64 / (1u64 << 30) as f64)),
        ),
    )
}

/// Largest per-node deviation of simulated frequencies from `u`, in standard errors.
fn worst_deviation(freq: &[f64], u: &[f64], runs: usize) -> f64 {
    freq.iter()
        .zip(u)
        .map(|(&f, &p)| {
            let se = (p * (1.0 - p) / runs as f64).sqrt().max(1e-12);
            (f - p).abs() / se
        })
        .fold(0.0, f64::max)
}

fn unification() -> Outcome {
    let n = 50;
    let voter = common::circulant(n, 4, 0.0);
    let aug = augment_with_bias(&voter, 0.0).unwrap();
    let z: Vec<f64> = (0..n).map(|i| ((i * 13) % 17) as f64 / 16.0).collect();
    let u = mean_field(&aug, &SeedSet::empty(), ModelMode::Voter, Some(&z), 100).unwrap();
    let first: f64 = u[0].iter().sum();
    let drift = u.iter().map(|ut| (ut.iter().sum::<f64>() - first).abs() / n as f64).fold(0.0, f64::max);

    let (runs, t) = (100_000, 10);
    let seeds = SeedSet::new(vec![0, 25]).unwrap();
    let base = common::random_network(n, 0.08, 0.0, 31);
    let nlt = Network::new(
        n,
        base.edges().iter().map(|e| hc_influence::graph::Edge::new(e.src, e.dst, e.weight * 0.85)).collect(),
    )
    .unwrap();
    let direct = simulate_nlt_direct(&nlt, &seeds, Some(&z), t, runs, 41).unwrap();
    let reduced = augment_with_bias(&nlt_to_hc(&nlt).unwrap(), 0.0).unwrap();
    let mf = mean_field(&reduced, &seeds, ModelMode::Nlt, Some(&z), t).unwrap();
    let nlt_worst = worst_deviation(&direct, &mf[t], runs);

    let glt_net = common::circulant(n, 3, 0.0);
    let glt_beta = 0.2;
    let direct = simulate_glt_binary_direct(&glt_net, glt_beta, &seeds, Some(&z), t, runs, 43).unwrap();
    let (reduced, b) = glt_binary_to_hc(&glt_net, glt_beta).unwrap();
    let reduced = augment_with_bias(&reduced, b).unwrap();
    let mf = mean_field(&reduced, &seeds, ModelMode::GltBinary { beta: glt_beta }, Some(&z), t).unwrap();
    let glt_worst = worst_deviation(&direct, &mf[t], runs);

    outcome(
        drift < 1e-12 && nlt_worst <= 3.0 && glt_worst <= 3.0,
        format!("voter drift {drift:.1e}; worst node deviation in SE: nlt {nlt_worst:.2}, glt {glt_worst:.2}"),
    )
}
