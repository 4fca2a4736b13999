//! Acceptance run: one line per criterion with its tolerance and runtime
//! limit. Pass criterion ids as arguments to run a subset, e.g.
//! `cargo test --test acceptance -- 3 5`.

use std::time::{Duration, Instant};

use rand::Rng as _;

use gibbslab::decomposition::{
    build_skeleton, decompose, find_rule_application, GoodBadLabeling, ScanOrder, SkeletonParams,
};
use gibbslab::dynamics::{glauber_step, ChainState, TreeMessages};
use gibbslab::exact::conditional_law;
use gibbslab::experiments::{run_scaling, ExperimentSpec};
use gibbslab::graph::{check_hypothesis, generate_er, HypothesisParams, DEFAULT_PATH_BUDGET};
use gibbslab::model::auto_degree_cap;
use gibbslab::rng;
use gibbslab::verify::zoo::{random_soft, random_tree};
use gibbslab::verify::{
    BlockCompositionSuite, CanonicalSuite, CheegerSuite, ContractionSuite, DecaySuite,
    DetailedBalanceSuite, SandwichSuite, SkeletonJointSuite, Suite, SuiteContext, SuiteOutcome,
};
use gibbslab::{Graph, LogBase, SpinModel};

type Outcome = gibbslab::Result<(bool, String)>;

struct Criterion {
    id: u32,
    title: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, title: "exact-chain correctness", limit: Duration::from_secs(60), run: exact_chains },
    Criterion { id: 2, title: "sampler fidelity, triangle q=3", limit: Duration::from_secs(10), run: sampler_fidelity },
    Criterion { id: 3, title: "tree block sampler", limit: Duration::from_secs(60), run: tree_sampler },
    Criterion { id: 4, title: "tree correlation decay", limit: Duration::from_secs(300), run: correlation_decay },
    Criterion { id: 5, title: "decomposition guarantees", limit: Duration::from_secs(600), run: decomposition },
    Criterion { id: 6, title: "skeleton order independence", limit: Duration::from_secs(300), run: skeleton_order },
    Criterion { id: 7, title: "path coupling contraction", limit: Duration::from_secs(60), run: path_coupling },
    Criterion { id: 8, title: "bound dominance", limit: Duration::from_secs(120), run: bound_dominance },
    Criterion { id: 9, title: "scaling regression", limit: Duration::from_secs(1800), run: scaling },
    Criterion { id: 10, title: "skeleton joint consistency", limit: Duration::from_secs(60), run: skeleton_joint },
];

fn main() {
    let wanted: Vec<u32> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for c in CRITERIA {
        if !wanted.is_empty() && !wanted.contains(&c.id) {
            continue;
        }
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.limit;
        let (pass, detail) = match result {
            Ok((pass, detail)) => (pass && in_time, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "[{}] {:>2} {} ({:.1} s, limit {} s{}): {detail}",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            elapsed.as_secs_f64(),
            c.limit.as_secs(),
            if in_time { "" } else { ", over limit" },
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn ctx() -> SuiteContext {
    SuiteContext::default()
}

fn summarize(outcomes: &[SuiteOutcome]) -> (bool, String) {
    let mut pass = true;
    let mut parts = Vec::new();
    for o in outcomes {
        let failures = o.failures().count();
        pass &= failures == 0 && o.skipped.is_empty();
        parts.push(format!(
            "{}: {} instances, {} records, {} failed, {} skipped",
            o.suite,
            o.instances,
            o.records.len(),
            failures,
            o.skipped.len()
        ));
        if let Some(f) = o.failures().next() {
            parts.push(format!("first failure {f:?}"));
        }
    }
    (pass, parts.join("; "))
}

fn exact_chains() -> Outcome {
    let c = ctx();
    let outcomes = vec![
        DetailedBalanceSuite::default().run(&c)?,
        SandwichSuite::default().run(&c)?,
    ];
    Ok(summarize(&outcomes))
}

fn empirical_tv(m: &SpinModel, g: &Graph, steps: u64, seed: u64) -> gibbslab::Result<(f64, usize)> {
    let chain = gibbslab::exact::enumerate(m, g, 1_000_000)?;
    let (_, start) = auto_degree_cap(m, g)?;
    let mut st = ChainState::new(start, seed);
    let mut counts = vec![0u64; chain.len()];
    for _ in 0..steps {
        glauber_step(m, g, &mut st, true)?;
        let i = chain.index_of(&st.config).expect("chain stays feasible");
        counts[i] += 1;
    }
    let tv = 0.5
        * counts
            .iter()
            .zip(&chain.stationary)
            .map(|(&c, p)| (c as f64 / steps as f64 - p).abs())
            .sum::<f64>();
    Ok((tv, chain.len()))
}

/// Time-averaged occupation of the lazy chain over 10⁶ steps against the
/// uniform law on proper colorings.
fn sampler_fidelity() -> Outcome {
    let g = Graph::complete(3);
    let (tv, states) = empirical_tv(&SpinModel::coloring(3)?, &g, 1_000_000, 1)?;
    let (tv4, states4) = empirical_tv(&SpinModel::coloring(4)?, &g, 1_000_000, 1)?;
    Ok((
        tv <= 0.02,
        format!(
            "TV {tv:.4} over {states} colorings (bound 0.02); every vertex of a 3-colored triangle \
             sees the other two colors, so the chain never leaves its start; \
             same run at q=4: TV {tv4:.4} over {states4} colorings"
        ),
    ))
}

/// Random tree on `1..=10` vertices plus up to four outside vertices, each
/// joined to one tree vertex, with uniformly random outside states.
fn tree_instance(m: &SpinModel, rng: &mut rng::Rng) -> (Graph, Vec<usize>, Vec<usize>) {
    let k = rng.random_range(1..=10);
    let t = random_tree(k, rng);
    let b = rng.random_range(0..=4);
    let mut edges: Vec<(usize, usize)> = t.edges().collect();
    for i in 0..b {
        edges.push((rng.random_range(0..k), k + i));
    }
    let g = Graph::from_edges(k + b, &edges).expect("tree instance");
    let mut s = vec![0; k + b];
    for x in &mut s[k..] {
        *x = rng.random_range(0..m.q());
    }
    (g, (0..k).collect(), s)
}

/// TV between the message-table law and brute-force enumeration, and
/// between 10⁵ draws and enumeration. `None` if the boundary is infeasible.
fn tree_tvs(
    m: &SpinModel,
    g: &Graph,
    block: &[usize],
    s: &[usize],
    samples: usize,
    rng: &mut rng::Rng,
) -> gibbslab::Result<Option<(f64, f64, usize)>> {
    let law = match conditional_law(m, g, block, s, 1_000_000) {
        Ok(law) => law,
        Err(gibbslab::Error::BoundaryInfeasible) => return Ok(None),
        Err(e) => return Err(e),
    };
    let tm = TreeMessages::compute(m, g, block, s, &[])?;
    let mut x = s.to_vec();
    let mut covered = 0.0;
    let mut exact_tv = 0.0;
    for (state, p) in law.states.iter().zip(&law.probs) {
        for (&v, &xv) in block.iter().zip(state) {
            x[v] = xv;
        }
        let q = tm.probability(&x);
        covered += q;
        exact_tv += (q - p).abs();
    }
    exact_tv = 0.5 * (exact_tv + (1.0 - covered).abs());
    let mut counts = vec![0usize; law.states.len()];
    let mut outside = 0usize;
    for _ in 0..samples {
        tm.sample(&mut x, rng);
        let key: Vec<usize> = block.iter().map(|&v| x[v]).collect();
        match law.states.binary_search(&key) {
            Ok(i) => counts[i] += 1,
            Err(_) => outside += 1,
        }
    }
    let n = samples as f64;
    let mc_tv = 0.5
        * (counts.iter().zip(&law.probs).map(|(&c, p)| (c as f64 / n - p).abs()).sum::<f64>()
            + outside as f64 / n);
    Ok(Some((exact_tv, mc_tv, law.states.len())))
}

/// Hardcore β = 0.4 for both parts; coloring q = 3 and soft q = 3 laws
/// are compared exactly as well. Empirical TV on a law with K states carries
/// a sampling floor near 0.4·√(K/10⁵), above 0.02 once K exceeds about 250,
/// which high-entropy soft and coloring laws on ten vertices do.
fn tree_sampler() -> Outcome {
    let mut rng = rng::seeded(2024);
    let hardcore = SpinModel::hardcore(0.4)?;
    let (mut worst_exact, mut worst_mc, mut largest, mut done) = (0.0f64, 0.0f64, 0, 0);
    while done < 20 {
        let (g, block, s) = tree_instance(&hardcore, &mut rng);
        if let Some((e, mc, k)) = tree_tvs(&hardcore, &g, &block, &s, 100_000, &mut rng)? {
            worst_exact = worst_exact.max(e);
            worst_mc = worst_mc.max(mc);
            largest = largest.max(k);
            done += 1;
        }
    }
    let mut other_exact = 0.0f64;
    let mut other = 0;
    while other < 40 {
        let m = if other % 2 == 0 {
            SpinModel::coloring(3)?
        } else {
            random_soft(3, 0.5, &mut rng)
        };
        let (g, block, s) = tree_instance(&m, &mut rng);
        if let Some((e, _, _)) = tree_tvs(&m, &g, &block, &s, 0, &mut rng)? {
            other_exact = other_exact.max(e);
            other += 1;
        }
    }
    Ok((
        worst_exact <= 1e-12 && worst_mc <= 0.02 && other_exact <= 1e-12,
        format!(
            "20 hardcore trees: max exact TV {worst_exact:.2e} (bound 1e-12), max Monte Carlo TV \
             {worst_mc:.4} at 10^5 samples (bound 0.02), largest law {largest} states; \
             40 coloring/soft trees: max exact TV {other_exact:.2e}"
        ),
    ))
}

fn correlation_decay() -> Outcome {
    let out = DecaySuite::default().run(&ctx())?;
    let (pass, detail) = summarize(std::slice::from_ref(&out));
    let worst = out
        .records
        .iter()
        .map(|r| r.exact_value - r.bound_value)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((pass, format!("{detail}; worst observed − bound {worst:.3e}")))
}

const DECOMPOSITION_PARAMS: HypothesisParams = HypothesisParams {
    a: 0.2,
    alpha: 0.25,
    t: 1,
    delta: 2.0,
};

/// First 50 seeds of G(5000, 2/5000) passing the hypothesis check at the
/// fitted parameters, each decomposed at the default block scale.
fn decomposition() -> Outcome {
    let hp = DECOMPOSITION_PARAMS;
    let (mut passing, mut tried, mut violations) = (0, 0, 0);
    let (mut bad, mut blocks_min) = (0, usize::MAX);
    let mut seed = 0;
    while passing < 50 {
        seed += 1;
        tried += 1;
        let g = generate_er(5000, 2.0, seed)?;
        if !check_hypothesis(&g, &hp, LogBase::E, DEFAULT_PATH_BUDGET)?.pass {
            continue;
        }
        passing += 1;
        let d = decompose(&g, &hp, None, LogBase::E, ScanOrder::CheapFirst, DEFAULT_PATH_BUDGET)?;
        violations += d.checks.iter().filter(|c| !c.pass).count();
        bad += d.labeling.bad_count();
        blocks_min = blocks_min.min(d.partition.blocks.len());
    }
    Ok((
        violations == 0,
        format!(
            "(a, α, t, δ) = (0.2, 0.25, 1, 2); 50 of {tried} seeds pass the check; \
             {violations} structural violations; {bad} bad vertices in total; \
             at least {blocks_min} blocks per graph"
        ),
    ))
}

/// Random tree on 50..=200 vertices with one to three chords between
/// vertices at most four apart, closing short cycles.
fn chorded_tree(rng: &mut rng::Rng) -> (Graph, u32) {
    let n = rng.random_range(50..=200);
    let t = random_tree(n, rng);
    let mut edges: Vec<(usize, usize)> = t.edges().collect();
    let chords = rng.random_range(1..=3);
    let mut added = 0;
    while added < chords {
        let u = rng.random_range(0..n);
        let d = t.bfs_distances(u);
        let near: Vec<usize> = (0..n).filter(|&v| (2..=4).contains(&d[v])).collect();
        if near.is_empty() {
            continue;
        }
        let v = near[rng.random_range(0..near.len())];
        if !edges.contains(&(u.min(v), u.max(v))) {
            edges.push((u.min(v), u.max(v)));
            added += 1;
        }
    }
    (Graph::from_edges(n, &edges).expect("chorded tree"), chords)
}

fn skeleton_order() -> Outcome {
    let mut rng = rng::seeded(6);
    let (mut same, mut fixed, mut nonempty) = (0, 0, 0);
    for _ in 0..50 {
        let (g, chords) = chorded_tree(&mut rng);
        let n = g.n();
        let labeling = GoodBadLabeling::all_good(n);
        let mut ws = Vec::new();
        for order in [ScanOrder::CheapFirst, ScanOrder::CyclesFirstDescending] {
            let p = SkeletonParams {
                order,
                ..SkeletonParams::new(0.5, chords)
            };
            let sk = build_skeleton(&g, &labeling, &p)?;
            let limit = 5.0 * p.scale(n);
            let at_fixed_point = [ScanOrder::CheapFirst, ScanOrder::CyclesFirstDescending]
                .iter()
                .all(|&o| find_rule_application(&g, &sk.members, limit, o).is_none());
            ws.push((sk.members, at_fixed_point));
        }
        if ws[0].0 == ws[1].0 {
            same += 1;
        }
        if ws[0].1 && ws[1].1 {
            fixed += 1;
        }
        if ws[0].0.iter().any(|&b| b) {
            nonempty += 1;
        }
    }
    Ok((
        same == 50 && fixed == 50,
        format!(
            "50 chorded trees on 50..200 vertices: identical W in {same}, fixed point in {fixed}, \
             nonempty W in {nonempty}"
        ),
    ))
}

fn path_coupling() -> Outcome {
    let out = ContractionSuite::default().run(&ctx())?;
    let worst = out
        .records
        .iter()
        .map(|r| r.exact_value)
        .fold(f64::NEG_INFINITY, f64::max);
    let (pass, detail) = summarize(std::slice::from_ref(&out));
    Ok((pass, format!("{detail}; largest expected distance one step after a unit disagreement {worst:.4}")))
}

fn bound_dominance() -> Outcome {
    let c = ctx();
    let outcomes = vec![
        CheegerSuite::default().run(&c)?,
        CanonicalSuite::default().run(&c)?,
        BlockCompositionSuite.run(&c)?,
    ];
    Ok(summarize(&outcomes))
}

/// Median coalescence steps per size, pinned from the first run.
const PINNED_MEDIANS: [(usize, f64); 4] = [(250, 1307.0), (500, 3707.0), (1000, 7270.0), (2000, 18882.0)];

fn scaling() -> Outcome {
    let spec = ExperimentSpec {
        model: SpinModel::coloring(20)?.to_spec(),
        d: 2.0,
        ns: vec![250, 500, 1000, 2000],
        seeds: vec![1, 2, 3, 4, 5],
        horizon: gibbslab::experiments::DEFAULT_SCALING_HORIZON,
        lazy: false,
    };
    let report = run_scaling(&spec)?;
    let all = report.rows.iter().all(|r| r.coalesced);
    let slope = report.fit.slope;
    let medians: Vec<(usize, f64)> = report
        .fit
        .medians
        .iter()
        .map(|m| (m.n, m.median.unwrap_or(f64::NAN)))
        .collect();
    let pinned = medians == PINNED_MEDIANS;
    Ok((
        all && slope.is_some_and(|s| s <= 3.5) && pinned,
        format!(
            "all coalesced: {all}; slope {} (bound 3.5); medians {medians:?} {}",
            slope.map_or("undefined".into(), |s| format!("{s:.4}")),
            if pinned { "match the pinned table" } else { "DIFFER from the pinned table" }
        ),
    ))
}

fn skeleton_joint() -> Outcome {
    let out = SkeletonJointSuite.run(&ctx())?;
    let worst = out
        .records
        .iter()
        .map(|r| r.exact_value)
        .fold(0.0, f64::max);
    let (pass, detail) = summarize(std::slice::from_ref(&out));
    Ok((pass, format!("{detail}; max TV {worst:.2e} (bound 1e-12)")))
}
