use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use gibbslab::decomposition::{decompose, BlockPartition, ScanOrder};
use gibbslab::dynamics::{
    coalescence_time, contraction_exhaustive, contraction_probe, run_dynamics, trace_csv,
    ChainState, Checkpoint, ContractionReport, DynamicsRegistry, UpdateContext,
};
use gibbslab::exact::{
    build_chain, canonical_path_bound, cheeger_bound, detailed_balance_defect, dump_chain,
    row_sum_defect, sandwich_check, CanonicalPathReport, CheegerBound, CheegerReading,
    SandwichReport,
};
use gibbslab::experiments::{adversarial_pair, run_scaling, scaling_csv, ExperimentSpec};
use gibbslab::graph::{check_hypothesis, generate_er, read_edge_list, write_edge_list, HypothesisParams};
use gibbslab::model::{auto_degree_cap, read_configuration, write_configuration};
use gibbslab::report::{BoundRecord, CheckRecord};
use gibbslab::verify::{SuiteContext, SuiteOutcome, SuiteRegistry};
use gibbslab::{Graph, LogBase, ModelKind, SpinModel};

use crate::config::{self, Config};
use crate::{Cli, Command, Format, HypothesisArgs, Status};

struct Globals {
    seed: u64,
    budget: Option<u64>,
    log_base: LogBase,
    out: Option<PathBuf>,
    format: Format,
}

pub fn run(cli: Cli) -> Result<Status> {
    let cfg = config::load(cli.config.as_deref())?;
    let format = match cli.format {
        Some(f) => f,
        None => match cfg.format.as_str() {
            "json" => Format::Json,
            "csv" => Format::Csv,
            other => bail!(gibbslab::Error::InvalidInput(format!("unknown format {other:?}"))),
        },
    };
    let log_base: LogBase = cli.log_base.as_deref().unwrap_or(&cfg.log_base).parse()?;
    let gl = Globals {
        seed: cli.seed.unwrap_or(cfg.seed),
        budget: cli.budget,
        log_base,
        out: cli.out,
        format,
    };
    if gl.budget == Some(0) {
        bail!(gibbslab::Error::InvalidInput("budget must be positive".into()));
    }
    match cli.command {
        Command::Gen(a) => gen(&gl, &cfg, a),
        Command::Check(a) => check(&gl, &cfg, a),
        Command::Decompose(a) => decompose_cmd(&gl, &cfg, a),
        Command::Sample(a) => sample(&gl, &cfg, a),
        Command::Exact(a) => exact(&gl, &cfg, a),
        Command::Verify(a) => verify(&gl, &cfg, a),
        Command::Scaling(a) => scaling(&gl, &cfg, a),
        Command::Couple(a) => couple(&gl, &cfg, a),
        Command::Defaults => {
            emit(gl.out.as_deref(), config::defaults_text())?;
            Ok(Status::Pass)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn load_graph(path: &Path) -> Result<Graph> {
    read_edge_list(path).with_context(|| format!("reading graph {}", path.display()))
}

/// A JSON model file, or `coloring:Q` / `hardcore:BETA`.
pub fn load_model(arg: &str) -> Result<SpinModel> {
    let path = Path::new(arg);
    if path.exists() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading model {arg}"))?;
        return SpinModel::from_json(&text).with_context(|| format!("parsing model {arg}"));
    }
    let invalid = || gibbslab::Error::InvalidInput(format!("no model file or shorthand {arg:?}"));
    let (kind, param) = arg.split_once(':').ok_or_else(invalid)?;
    Ok(match kind {
        "coloring" => SpinModel::coloring(param.parse().map_err(|_| invalid())?)?,
        "hardcore" => SpinModel::hardcore(param.parse().map_err(|_| invalid())?)?,
        _ => return Err(invalid().into()),
    })
}

fn hypothesis(cfg: &Config, a: &HypothesisArgs) -> HypothesisParams {
    HypothesisParams {
        a: a.a.unwrap_or(cfg.check.a),
        alpha: a.alpha.unwrap_or(cfg.check.alpha),
        t: a.t.unwrap_or(cfg.check.t),
        delta: a.delta.unwrap_or(cfg.check.delta),
    }
}

fn check_csv(records: &[CheckRecord]) -> String {
    let mut out = String::from("check,pass,value,bound\n");
    for r in records {
        let _ = writeln!(out, "{},{},{},{}", r.check, r.pass, r.value, r.bound);
    }
    out
}

fn status(pass: bool) -> Status {
    if pass {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn gen(gl: &Globals, cfg: &Config, a: crate::GenArgs) -> Result<Status> {
    let g = generate_er(a.n.unwrap_or(cfg.gen.n), a.d.unwrap_or(cfg.gen.d), gl.seed)?;
    emit(gl.out.as_deref(), &write_edge_list(&g))?;
    Ok(Status::Pass)
}

fn check(gl: &Globals, cfg: &Config, a: crate::CheckArgs) -> Result<Status> {
    let g = load_graph(&a.graph)?;
    let hp = hypothesis(cfg, &a.hyp);
    let budget = gl.budget.unwrap_or(cfg.check.budget);
    let report = check_hypothesis(&g, &hp, gl.log_base, budget)?;
    let text = match gl.format {
        Format::Json => json(&report),
        Format::Csv => check_csv(&report.records),
    };
    emit(gl.out.as_deref(), &text)?;
    eprintln!(
        "check: radius {} max excess {} m_alpha {:.4} (bound {:.4}) {}",
        report.radius,
        report.max_tree_excess,
        report.m_alpha,
        report.m_alpha_bound,
        if report.pass { "pass" } else { "FAIL" }
    );
    Ok(status(report.pass))
}

#[derive(Serialize)]
struct DecomposeReport<'a> {
    n: usize,
    bad: usize,
    skeleton_vertices: usize,
    blocks: usize,
    pass: bool,
    checks: &'a [CheckRecord],
}

fn decompose_cmd(gl: &Globals, cfg: &Config, a: crate::DecomposeArgs) -> Result<Status> {
    let g = load_graph(&a.graph)?;
    let hp = hypothesis(cfg, &a.hyp);
    let order_name = a.order.as_deref().unwrap_or(&cfg.decompose.order);
    let order: ScanOrder = serde_json::from_value(serde_json::Value::String(order_name.into()))
        .map_err(|_| gibbslab::Error::InvalidInput(format!("unknown scan order {order_name:?}")))?;
    let budget = gl.budget.unwrap_or(cfg.decompose.budget);
    let d = decompose(&g, &hp, a.l_block, gl.log_base, order, budget)?;
    emit(gl.out.as_deref(), &d.partition.to_json())?;
    let report = DecomposeReport {
        n: g.n(),
        bad: d.labeling.bad_count(),
        skeleton_vertices: d.skeleton.vertices().len(),
        blocks: d.partition.blocks.len(),
        pass: d.pass(),
        checks: &d.checks,
    };
    if let Some(path) = &a.report {
        let text = match gl.format {
            Format::Json => json(&report),
            Format::Csv => check_csv(&d.checks),
        };
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    eprintln!(
        "decompose: {} bad, {} skeleton vertices, {} blocks, {}",
        report.bad,
        report.skeleton_vertices,
        report.blocks,
        if report.pass { "pass" } else { "FAIL" }
    );
    Ok(status(report.pass))
}

fn sample(gl: &Globals, cfg: &Config, a: crate::SampleArgs) -> Result<Status> {
    let m = load_model(&a.model)?;
    let g = load_graph(&a.graph)?;
    let partition = a
        .partition
        .as_ref()
        .map(|p| BlockPartition::read(p).with_context(|| format!("reading partition {}", p.display())))
        .transpose()?;
    let mut name = a.dynamics.unwrap_or_else(|| cfg.sample.dynamics.clone());
    if a.lazy {
        if name != "glauber" {
            bail!(gibbslab::Error::InvalidInput(format!("--lazy does not apply to {name}")));
        }
        name = "lazy-glauber".into();
    }
    let registry = DynamicsRegistry::default();
    let rule = registry.get(&name)?;
    let state = match (&a.resume, &a.init) {
        (Some(p), _) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let cp: Checkpoint = serde_json::from_str(&text).context("parsing checkpoint")?;
            ChainState::restore(&cp)?
        }
        (None, Some(p)) => ChainState::new(read_configuration(p)?, gl.seed),
        (None, None) => ChainState::new(auto_degree_cap(&m, &g)?.1, gl.seed),
    };
    let steps = a.steps.unwrap_or(cfg.sample.steps);
    let stride = a.stride.or(Some(cfg.sample.stride)).filter(|&s| s > 0);
    let ctx = UpdateContext {
        model: &m,
        graph: &g,
        partition: partition.as_ref(),
    };
    let run = run_dynamics(rule, &ctx, state, steps, stride)?;
    emit(gl.out.as_deref(), &write_configuration(&run.state.config))?;
    if let Some(p) = &a.trace {
        std::fs::write(p, trace_csv(&run.trace)).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = &a.checkpoint {
        std::fs::write(p, json(&run.state.checkpoint()))
            .with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(Status::Pass)
}

#[derive(Serialize)]
struct ExactReport {
    states: usize,
    lazy: bool,
    sandwich: SandwichReport,
    detailed_balance_defect: f64,
    row_sum_defect: f64,
    cheeger: Vec<CheegerEntry>,
    canonical_paths: Option<CanonicalPathReport>,
    pass: bool,
}

#[derive(Serialize)]
struct CheegerEntry {
    reading: CheegerReading,
    bound: Option<CheegerBound>,
    unavailable: Option<String>,
}

fn exact(gl: &Globals, cfg: &Config, a: crate::ExactArgs) -> Result<Status> {
    let m = load_model(&a.model)?;
    let g = load_graph(&a.graph)?;
    let budget = gl.budget.unwrap_or(cfg.exact.budget);
    let horizon = a.horizon.unwrap_or(cfg.exact.horizon);
    let tol = cfg.exact.tolerance;
    let chain = build_chain(&m, &g, a.lazy, budget)?;
    if let Some(p) = &a.dump {
        std::fs::write(p, dump_chain(&chain)).with_context(|| format!("writing {}", p.display()))?;
    }
    let sandwich = sandwich_check(&chain, horizon, tol)?;
    let mut cheeger = Vec::new();
    for reading in [CheegerReading::AllPairs, CheegerReading::NonzeroPairs] {
        cheeger.push(match cheeger_bound(&chain, reading) {
            Ok(b) => CheegerEntry {
                reading,
                bound: Some(b),
                unavailable: None,
            },
            Err(e) if !e.is_exhaustion() => CheegerEntry {
                reading,
                bound: None,
                unavailable: Some(e.to_string()),
            },
            Err(e) => return Err(e.into()),
        });
    }
    let canonical_paths = if m.kind() == ModelKind::Hardcore {
        Some(canonical_path_bound(&m, &g, budget)?)
    } else {
        None
    };
    let db = detailed_balance_defect(&chain)?;
    let rs = row_sum_defect(&chain)?;
    let pass = sandwich.pass() && db <= 1e-12 && rs <= 1e-12;
    let report = ExactReport {
        states: chain.len(),
        lazy: a.lazy,
        sandwich,
        detailed_balance_defect: db,
        row_sum_defect: rs,
        cheeger,
        canonical_paths,
        pass,
    };
    let text = match gl.format {
        Format::Json => json(&report),
        Format::Csv => {
            let s = &report.sandwich;
            format!(
                "states,lazy,tau,tau_mix,min_pi,upper,vacuous,detailed_balance_defect,row_sum_defect,pass\n\
                 {},{},{},{},{},{},{},{},{},{}\n",
                report.states, report.lazy, s.tau, s.tau_mix, s.min_pi, s.upper, s.vacuous, db, rs, pass
            )
        }
    };
    emit(gl.out.as_deref(), &text)?;
    Ok(status(pass))
}

fn verify(gl: &Globals, cfg: &Config, a: crate::VerifyArgs) -> Result<Status> {
    let registry = SuiteRegistry::default();
    let names: Vec<String> = if a.suite == "all" {
        registry.names().into_iter().map(String::from).collect()
    } else {
        registry.get(&a.suite)?;
        vec![a.suite.clone()]
    };
    let ctx = SuiteContext {
        budget: gl.budget.unwrap_or(cfg.verify.budget),
        horizon: a.horizon.unwrap_or(cfg.verify.horizon),
        seed: gl.seed,
        filter: a.filter.clone(),
    };
    let mut outcomes: Vec<SuiteOutcome> = Vec::new();
    for name in &names {
        let outcome = registry.get(name)?.run(&ctx)?;
        eprintln!(
            "{}: {} instances, {} records, {} failed, {} skipped",
            outcome.suite,
            outcome.instances,
            outcome.records.len(),
            outcome.failures().count(),
            outcome.skipped.len()
        );
        for (inst, why) in &outcome.skipped {
            eprintln!("  skipped {inst}: {why}");
        }
        outcomes.push(outcome);
    }
    let text = match gl.format {
        Format::Json => json(&outcomes),
        Format::Csv => verify_csv(&outcomes),
    };
    emit(gl.out.as_deref(), &text)?;
    Ok(status(outcomes.iter().all(SuiteOutcome::pass)))
}

fn verify_csv(outcomes: &[SuiteOutcome]) -> String {
    let mut out = String::from("suite,instance,bound_name,bound_value,exact_value,pass,tolerance,note\n");
    for o in outcomes {
        for r in &o.records {
            let BoundRecord {
                instance,
                bound_name,
                bound_value,
                exact_value,
                pass,
                tolerance,
                note,
            } = r;
            let _ = writeln!(
                out,
                "{},\"{instance}\",{bound_name},{bound_value},{exact_value},{pass},{tolerance},{}",
                o.suite,
                note.as_deref().unwrap_or("")
            );
        }
    }
    out
}

fn scaling(gl: &Globals, cfg: &Config, a: crate::ScalingArgs) -> Result<Status> {
    let model = load_model(a.model.as_deref().unwrap_or(&cfg.scaling.model))?;
    let spec = ExperimentSpec {
        model: model.to_spec(),
        d: a.d.unwrap_or(cfg.scaling.d),
        ns: a.ns.unwrap_or_else(|| cfg.scaling.ns.clone()),
        seeds: a.seeds.unwrap_or_else(|| cfg.scaling.seeds.clone()),
        horizon: a.horizon.unwrap_or(cfg.scaling.horizon),
        lazy: a.lazy,
    };
    let report = run_scaling(&spec)?;
    let text = match gl.format {
        Format::Json => json(&report),
        Format::Csv => scaling_csv(&report.rows),
    };
    emit(gl.out.as_deref(), &text)?;
    match report.fit.slope {
        Some(s) => eprintln!(
            "scaling: slope {s:.4}, non-coalesced fraction {}",
            report.fit.non_coalesced_fraction
        ),
        None => eprintln!("scaling: slope undefined (fewer than two sizes with a median)"),
    }
    if let (Some(max), Some(s)) = (a.max_slope, report.fit.slope) {
        if s > max {
            return Ok(Status::Fail);
        }
    }
    if report.rows.iter().any(|r| !r.coalesced) {
        return Ok(Status::Exhausted);
    }
    Ok(Status::Pass)
}

#[derive(Serialize)]
struct CoupleReport {
    contraction: ContractionReport,
    exhaustive: bool,
    start_distance: usize,
    coalescence_steps: Option<u64>,
    horizon: u64,
}

fn couple(gl: &Globals, cfg: &Config, a: crate::CoupleArgs) -> Result<Status> {
    let m = load_model(&a.model)?;
    let g = load_graph(&a.graph)?;
    let contraction = if a.exhaustive {
        contraction_exhaustive(&m, &g, a.lazy, gl.budget.unwrap_or(cfg.couple.budget))?
    } else {
        contraction_probe(&m, &g, a.pairs.unwrap_or(cfg.couple.pairs), gl.seed, a.lazy)?
    };
    let horizon = a.horizon.unwrap_or(cfg.couple.horizon);
    let (left, right) = adversarial_pair(&m, &g)?;
    let start_distance = left.iter().zip(&right).filter(|(x, y)| x != y).count();
    let steps = coalescence_time(&m, &g, &[(left, right)], horizon, gl.seed, a.lazy)?[0];
    let report = CoupleReport {
        contraction,
        exhaustive: a.exhaustive,
        start_distance,
        coalescence_steps: steps,
        horizon,
    };
    let text = match gl.format {
        Format::Json => json(&report),
        Format::Csv => {
            let c = &report.contraction;
            format!(
                "pairs,worst_change,implied_c,contracting,start_distance,coalescence_steps\n{},{},{},{},{},{}\n",
                c.pairs,
                c.worst_change,
                c.implied_c,
                c.contracting,
                start_distance,
                steps.map(|s| s.to_string()).unwrap_or_default()
            )
        }
    };
    emit(gl.out.as_deref(), &text)?;
    if !report.contraction.contracting {
        return Ok(Status::Fail);
    }
    if steps.is_none() {
        return Ok(Status::Exhausted);
    }
    Ok(Status::Pass)
}
