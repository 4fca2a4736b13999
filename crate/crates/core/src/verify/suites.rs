use rayon::prelude::*;

use super::zoo::{self, ZooInstance};
use super::{Suite, SuiteContext, SuiteOutcome};
use crate::dynamics::contraction_exhaustive;
use crate::exact::{
    self, block_composition_check, build_chain, canonical_path_bound, cheeger_bound,
    conditional_law, detailed_balance_defect, detailed_balance_rational, is_irreducible,
    mixing_time, row_sum_defect, sandwich_check, skeleton_block_law, tree_decay_check,
    CheegerReading, ExactChain,
};
use crate::graph::VertexSet;
use crate::model::{ModelKind, SpinModel};
use crate::report::BoundRecord;
use crate::{rng, Error, Result};

/// Largest vertex count in the default exact zoo.
pub const ZOO_MAX_VERTICES: usize = 5;

/// Runs `check` on the named items that pass the context filter, in
/// parallel, keeping item order. Budget and horizon exhaustion skip an
/// item; any other error aborts the suite.
fn run_items<T, F>(suite: &str, items: Vec<(String, T)>, ctx: &SuiteContext, check: F) -> Result<SuiteOutcome>
where
    T: Sync + Send,
    F: Fn(&str, &T) -> Result<Vec<BoundRecord>> + Sync,
{
    let items: Vec<(String, T)> = items
        .into_iter()
        .filter(|(name, _)| ctx.filter.as_deref().is_none_or(|f| name.contains(f)))
        .collect();
    let results: Vec<Result<Vec<BoundRecord>>> =
        items.par_iter().map(|(name, item)| check(name, item)).collect();
    let mut out = SuiteOutcome {
        suite: suite.to_string(),
        instances: items.len(),
        records: Vec::new(),
        skipped: Vec::new(),
    };
    for ((name, _), r) in items.iter().zip(results) {
        match r {
            Ok(recs) => out.records.extend(recs),
            Err(e) if e.is_exhaustion() => out.skipped.push((name.clone(), e.to_string())),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn vacuous(instance: &str, bound_name: &str, why: &str) -> BoundRecord {
    BoundRecord::upper(instance, bound_name, 0.0, 0.0, 0.0).with_note(why)
}

/// Runs `check` on every zoo chain in parallel. Instances without feasible
/// states produce one vacuous record.
fn over_zoo<F>(
    name: &str,
    max_n: usize,
    lazy: bool,
    ctx: &SuiteContext,
    check: F,
) -> Result<SuiteOutcome>
where
    F: Fn(&ZooInstance, &ExactChain) -> Result<Vec<BoundRecord>> + Sync,
{
    let items = named_zoo(max_n, ctx.seed);
    run_items(name, items, ctx, |_, inst| {
        let chain = build_chain(&inst.model, &inst.graph, lazy, ctx.budget)?;
        if chain.is_empty() {
            return Ok(vec![vacuous(&inst.name, name, "no feasible configuration")]);
        }
        check(inst, &chain)
    })
}

fn named_zoo(max_n: usize, seed: u64) -> Vec<(String, ZooInstance)> {
    zoo::exact_zoo(max_n, seed)
        .into_iter()
        .map(|i| (i.name.clone(), i))
        .collect()
}

/// Reversibility and row sums on the lazy and non-lazy chain of every zoo
/// instance. Models with 0/1 weights are checked in rational arithmetic.
#[derive(Debug, Clone)]
pub struct DetailedBalanceSuite {
    pub max_vertices: usize,
    pub tolerance: f64,
}

impl Default for DetailedBalanceSuite {
    fn default() -> Self {
        Self {
            max_vertices: ZOO_MAX_VERTICES,
            tolerance: 1e-12,
        }
    }
}

impl Suite for DetailedBalanceSuite {
    fn name(&self) -> &str {
        "detailed-balance"
    }

    fn run(&self, ctx: &SuiteContext) -> Result<SuiteOutcome> {
        let tol = self.tolerance;
        over_zoo(self.name(), self.max_vertices, false, ctx, |inst, chain| {
            let mut lazy = chain.clone();
            exact::transition_matrix(&mut lazy, &inst.model, &inst.graph, true)?;
            let mut recs = Vec::new();
            for (label, c) in [("non-lazy", chain), ("lazy", &lazy)] {
                let name = &inst.name;
                let balance = if inst.model.has_unit_weights() {
                    let ok = detailed_balance_rational(c, &inst.model, &inst.graph)?;
                    BoundRecord::upper(name, "detailed_balance", 0.0, if ok { 0.0 } else { 1.0 }, 0.0)
                        .with_note(format!("{label}, rational"))
                } else {
                    BoundRecord::upper(name, "detailed_balance", 0.0, detailed_balance_defect(c)?, tol)
                        .with_note(label)
                };
                recs.push(balance);
                recs.push(
                    BoundRecord::upper(name, "row_sum", 0.0, row_sum_defect(c)?, tol).with_note(label),
                );
            }
            Ok(recs)
        })
    }
}

/// `τ ≤ τ_mix ≤ τ(1 + ½ ln(1/min π))` on the lazy chain of every zoo
/// instance. Reducible chains pass vacuously and are noted.
#[derive(Debug, Clone)]
pub struct SandwichSuite {
    pub max_vertices: usize,
    pub tolerance: f64,
}

impl Default for SandwichSuite {
    fn default() -> Self {
        Self {
            max_vertices: ZOO_MAX_VERTICES,
            tolerance: 1e-9,
        }
    }
}

impl Suite for SandwichSuite {
    fn name(&self) -> &str {
        "sandwich"
    }

    fn run(&self, ctx: &SuiteContext) -> Result<SuiteOutcome> {
        over_zoo(self.name(), self.max_vertices, true, ctx, |inst, chain| {
            Ok(sandwich_check(chain, ctx.horizon, self.tolerance)?.records(&inst.name, self.tolerance))
        })
    }
}

/// `τ_mix ≤ 2/ε²` on the lazy zoo chains: the all-pairs reading wherever
/// its hypothesis holds, and the nonzero-pairs reading on every
/// irreducible chain.
#[derive(Debug, Clone)]
pub struct CheegerSuite {
    pub max_vertices: usize,
}

impl Default for CheegerSuite {
    fn default() -> Self {
        Self {
            max_vertices: ZOO_MAX_VERTICES,
        }
    }
}

impl Suite for CheegerSuite {
    fn name(&self) -> &str {
        "cheeger"
    }

    fn run(&self, ctx: &SuiteContext) -> Result<SuiteOutcome> {
        over_zoo(self.name(), self.max_vertices, true, ctx, |inst, chain| {
            if chain.len() < 2 {
                return Ok(vec![vacuous(&inst.name, "cheeger", "single state")]);
            }
            if !is_irreducible(chain.matrix()?) {
                return Ok(vec![vacuous(&inst.name, "cheeger", "reducible chain")]);
            }
            let t = mixing_time(chain, ctx.horizon)? as f64;
            let mut recs = Vec::new();
            for (reading, label) in [
                (CheegerReading::AllPairs, "cheeger_all_pairs"),
                (CheegerReading::NonzeroPairs, "cheeger_nonzero_pairs"),
            ] {
                match cheeger_bound(chain, reading) {
                    Ok(b) => recs.push(BoundRecord::upper(&inst.name, label, b.bound, t, 1e-9)),
                    Err(Error::HypothesisNotMet(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            Ok(recs)
        })
    }
}

/// `τ ≤ Lρ` for the hardcore zoo instances.
#[derive(Debug, Clone)]
pub struct CanonicalSuite {
    pub max_vertices: usize,
}

impl Default for CanonicalSuite {
    fn default() -> Self {
        Self {
            max_vertices: ZOO_MAX_VERTICES,
        }
    }
}

impl Suite for CanonicalSuite {
    fn name(&self) -> &str {
        "canonical"
    }

    fn run(&self, ctx: &SuiteContext) -> Result<SuiteOutcome> {
        let items: Vec<(String, ZooInstance)> = named_zoo(self.max_vertices, ctx.seed)
            .into_iter()
            .filter(|(_, i)| i.model.kind() == ModelKind::Hardcore)
            .collect();
        run_items(self.name(), items, ctx, |name, inst| {
            let r = canonical_path_bound(&inst.model, &inst.graph, ctx.budget)?;
            Ok(vec![BoundRecord::upper(name, "canonical_paths", r.bound, r.tau, 1e-9)
                .with_note(format!("L={} rho={}", r.length, r.congestion))])
        })
    }
}

/// Tree correlation decay on random trees with outside boundary vertices:
/// coloring at the threshold `q(λ)`, hardcore at `β = ln λ` and a random
/// three-state soft model just below `H*`. One record per tree and model,
/// at the vertex with the smallest margin.
#[derive(Debug, Clone)]
pub struct DecaySuite {
    pub trees: usize,
    pub max_tree: usize,
    pub max_boundary: usize,
    pub lambda: f64,
    pub boundary_samples: u64,
}

impl Default for DecaySuite {
    fn default() -> Self {
        Self {
            trees: 50,
            max_tree: 12,
            max_boundary: 7,
            lambda: 0.25,
            boundary_samples: 1000,
        }
    }
}

impl DecaySuite {
    fn models(&self, r: &mut rng::Rng) -> Vec<(&'static str, SpinModel)> {
        let lambda = self.lambda;
        vec![
            ("coloring", SpinModel::coloring(exact::coloring_q_threshold(lambda)).unwrap()),
            ("hardcore", SpinModel::hardcore(lambda.ln()).unwrap()),
            ("soft", zoo::random_soft(3, 0.99 * exact::soft_norm_threshold(lambda), r)),
        ]
    }
}

impl Suite for DecaySuite {
    fn name(&self) -> &str {
        "decay"
    }

    fn run(&self, ctx: &SuiteContext) -> Result<SuiteOutcome> {
        let mut r = rng::seeded(ctx.seed);
        let mut items = Vec::new();
        for i in 0..self.trees {
            let inst = zoo::decay_instance(self.max_tree, self.max_boundary, self.lambda, &mut r);
            let tree = format!("tree{i}-k{}-b{}", inst.tree.len(), inst.graph.n() - inst.tree.len());
            for (label, m) in self.models(&mut r) {
                items.push((format!("{tree}/{label}"), (i as u64, inst.clone(), m)));
            }
        }
        run_items(self.name(), items, ctx, |name, (i, inst, m)| {
            let t = VertexSet::new(inst.tree.clone());
            let mut worst: Option<exact::DecayReport> = None;
            for &v in &inst.tree {
                let rep = tree_decay_check(
                    m,
                    &inst.graph,
                    &t,
                    v,
                    self.lambda,
                    self.boundary_samples,
                    ctx.seed ^ i,
                )?;
                if worst.as_ref().is_none_or(|w| rep.margin < w.margin) {
                    worst = Some(rep);
                }
            }
            let w = worst.expect("trees are nonempty");
            let mut note = format!(
                "v={} psi={} boundaries={} skipped={}",
                w.vertex, w.psi, w.boundaries, w.skipped
            );
            if w.sampled {
                note.push_str(" sampled");
            }
            if !w.hypothesis_met {
                note.push_str(" parameters outside the decay regime");
            }
            let mut rec = BoundRecord::upper(name, "tree_decay", w.bound, w.observed, 1e-12).with_note(note);
            rec.pass &= w.hypothesis_met;
            Ok(vec![rec])
        })
    }
}

/// Composed skeleton law against the block conditional on the
/// hand-built skeleton blocks, within TV `1e-12`.
#[derive(Debug, Clone, Copy)]
pub struct SkeletonJointSuite;

impl Suite for SkeletonJointSuite {
    fn name(&self) -> &str {
        "skeleton-joint"
    }

    fn run(&self, ctx: &SuiteContext) -> Result<SuiteOutcome> {
        let items = exact::skeleton_zoo().into_iter().map(|i| (i.name.clone(), i)).collect();
        run_items(self.name(), items, ctx, |name, inst| {
            let law = conditional_law(&inst.model, &inst.graph, &inst.block.vertices, &inst.outside, ctx.budget)?;
            let composed =
                skeleton_block_law(&inst.model, &inst.graph, &inst.block, &inst.outside, &law, ctx.budget)?;
            let tv = 0.5 * composed.iter().zip(&law.probs).map(|(a, b)| (a - b).abs()).sum::<f64>();
            Ok(vec![BoundRecord::upper(name, "skeleton_joint_tv", 0.0, tv, 1e-12)
                .with_note(format!("{} block states", law.states.len()))])
        })
    }
}

/// `τ ≤ τ_block · max_i τ_i` on the partitioned instances, all chains
/// non-lazy.
#[derive(Debug, Clone, Copy)]
pub struct BlockCompositionSuite;

impl Suite for BlockCompositionSuite {
    fn name(&self) -> &str {
        "block-composition"
    }

    fn run(&self, ctx: &SuiteContext) -> Result<SuiteOutcome> {
        let items = zoo::partition_zoo().into_iter().map(|i| (i.name.clone(), i)).collect();
        run_items(self.name(), items, ctx, |name, inst| {
            let chain = build_chain(&inst.model, &inst.graph, false, ctx.budget)?;
            let r = block_composition_check(&chain, &inst.model, &inst.graph, &inst.partition, ctx.budget, ctx.seed)?;
            Ok(vec![r.record(name, 1e-9).with_note(format!(
                "tau_block={} tau_i={:?}",
                r.tau_block, r.tau_blocks
            ))])
        })
    }
}

/// Exact one-step path coupling over every unit pair on every Δ-regular
/// graph with at most `max_vertices` vertices, coloring with
/// `q = 2Δ + 2`. A record passes when `E[d_H'] < 1` for every pair.
#[derive(Debug, Clone)]
pub struct ContractionSuite {
    pub max_vertices: usize,
}

impl Default for ContractionSuite {
    fn default() -> Self {
        Self { max_vertices: 8 }
    }
}

impl Suite for ContractionSuite {
    fn name(&self) -> &str {
        "contraction"
    }

    fn run(&self, ctx: &SuiteContext) -> Result<SuiteOutcome> {
        let items = zoo::regular_zoo(self.max_vertices)
            .into_iter()
            .enumerate()
            .map(|(i, (d, g))| (format!("regular{i}-n{}-d{d}/coloring-q{}", g.n(), 2 * d + 2), (d, g)))
            .collect();
        run_items(self.name(), items, ctx, |name, (d, g)| {
            let m = SpinModel::coloring(2 * d + 2).unwrap();
            let r = contraction_exhaustive(&m, g, false, ctx.budget)?;
            let mut rec = BoundRecord::upper(name, "path_coupling", 1.0, 1.0 + r.worst_change, 0.0)
                .with_note(format!("{} unit pairs up to colour symmetry", r.pairs));
            rec.pass = r.contracting;
            Ok(vec![rec])
        })
    }
}
