//! Markov chains on configurations.
//!
//! Update rules implement [`UpdateRule`] and are looked up by name in a
//! [`DynamicsRegistry`]. The default registry contains
//!
//! | name            | rule                                               |
//! |-----------------|----------------------------------------------------|
//! | `glauber`       | single-site heat bath, uniform vertex              |
//! | `lazy-glauber`  | as above, holding with probability 1/2             |
//! | `block-uniform` | exact block resampling, block chosen uniformly     |
//! | `block-vertex`  | exact block resampling, block of a uniform vertex  |
//!
//! Random draws within one Glauber step happen in a fixed order (laziness
//! coin, vertex, state) so that coupled chains sharing a generator make the
//! same choices.

mod block;
mod coupling;
mod tree;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::decomposition::BlockPartition;
use crate::graph::Graph;
use crate::model::{Configuration, SpinModel};
use crate::rng::{self, Rng};
use crate::{Error, Result};

pub use block::{block_step, BlockSelection};
pub use coupling::{
    coalescence_time, contraction_exhaustive, contraction_probe, coupled_step, exact_one_step_distance, maximal_coupling,
    CoupledState, ContractionReport, CouplingEntry,
};
pub use tree::{tree_block_sample, TreeMessages};

#[derive(Debug, Clone)]
pub struct ChainState {
    pub config: Configuration,
    pub step: u64,
    pub rng: Rng,
}

impl ChainState {
    pub fn new(config: Configuration, seed: u64) -> Self {
        Self {
            config,
            step: 0,
            rng: rng::seeded(seed),
        }
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            config: self.config.clone(),
            step: self.step,
            rng_state: rng::state_to_hex(&self.rng),
        }
    }

    pub fn restore(cp: &Checkpoint) -> Result<Self> {
        Ok(Self {
            config: cp.config.clone(),
            step: cp.step,
            rng: rng::state_from_hex(&cp.rng_state)?,
        })
    }
}

/// Serialized chain state: configuration, step counter and generator state
/// as hex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config: Configuration,
    pub step: u64,
    pub rng_state: String,
}

/// One Glauber update in place.
pub fn glauber_step(m: &SpinModel, g: &Graph, state: &mut ChainState, lazy: bool) -> Result<()> {
    let mut buf = vec![0.0; m.q()];
    glauber_step_with(m, g, state, lazy, &mut buf)
}

pub(crate) fn glauber_step_with(
    m: &SpinModel,
    g: &Graph,
    state: &mut ChainState,
    lazy: bool,
    buf: &mut [f64],
) -> Result<()> {
    state.step += 1;
    if lazy && state.rng.random::<f64>() < 0.5 {
        return Ok(());
    }
    let n = g.n();
    if n == 0 {
        return Ok(());
    }
    let v = state.rng.random_range(0..n);
    m.local_conditional_into(g, &state.config, v, buf)?;
    let u = state.rng.random::<f64>();
    state.config[v] = rng::sample_index(buf, u);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: u64,
    pub hamming: usize,
    pub occupied: usize,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: ChainState,
    pub trace: Vec<TraceRow>,
}

pub fn default_stride(steps: u64) -> u64 {
    (steps / 10_000).max(1)
}

/// Runs `steps` Glauber updates from `start`. Every `stride` steps (and at
/// step 0) the Hamming distance to `start` and the number of vertices in a
/// nonzero state are recorded.
pub fn run_chain(
    m: &SpinModel,
    g: &Graph,
    start: &[usize],
    steps: u64,
    seed: u64,
    lazy: bool,
    stride: Option<u64>,
) -> Result<RunOutput> {
    m.validate_configuration(g, start)?;
    if !m.is_feasible(g, start) {
        return Err(Error::invalid("start configuration is infeasible"));
    }
    let stride = stride.unwrap_or_else(|| default_stride(steps)).max(1);
    let mut state = ChainState::new(start.to_vec(), seed);
    let mut buf = vec![0.0; m.q()];
    let mut trace = vec![observe(&state, start)];
    for _ in 0..steps {
        glauber_step_with(m, g, &mut state, lazy, &mut buf)?;
        if state.step % stride == 0 {
            trace.push(observe(&state, start));
        }
    }
    Ok(RunOutput { state, trace })
}

/// Like [`run_chain`] but with any registered update rule.
pub fn run_dynamics(
    rule: &dyn UpdateRule,
    ctx: &UpdateContext<'_>,
    mut state: ChainState,
    steps: u64,
    stride: Option<u64>,
) -> Result<RunOutput> {
    let (m, g) = (ctx.model, ctx.graph);
    m.validate_configuration(g, &state.config)?;
    if !m.is_feasible(g, &state.config) {
        return Err(Error::invalid("start configuration is infeasible"));
    }
    let stride = stride.unwrap_or_else(|| default_stride(steps)).max(1);
    let start = state.config.clone();
    let mut trace = vec![observe(&state, &start)];
    for _ in 0..steps {
        rule.step(ctx, &mut state)?;
        if state.step % stride == 0 {
            trace.push(observe(&state, &start));
        }
    }
    Ok(RunOutput { state, trace })
}

fn observe(state: &ChainState, reference: &[usize]) -> TraceRow {
    TraceRow {
        step: state.step,
        hamming: state
            .config
            .iter()
            .zip(reference)
            .filter(|(a, b)| a != b)
            .count(),
        occupied: state.config.iter().filter(|&&x| x != 0).count(),
    }
}

pub fn trace_csv(trace: &[TraceRow]) -> String {
    let mut out = String::from("step,hamming,occupied\n");
    for r in trace {
        let _ = writeln!(out, "{},{},{}", r.step, r.hamming, r.occupied);
    }
    out
}

/// Everything an update rule may read.
pub struct UpdateContext<'a> {
    pub model: &'a SpinModel,
    pub graph: &'a Graph,
    pub partition: Option<&'a BlockPartition>,
}

pub trait UpdateRule: Send + Sync {
    fn name(&self) -> &str;
    fn step(&self, ctx: &UpdateContext<'_>, state: &mut ChainState) -> Result<()>;
}

struct Glauber {
    lazy: bool,
}

impl UpdateRule for Glauber {
    fn name(&self) -> &str {
        if self.lazy {
            "lazy-glauber"
        } else {
            "glauber"
        }
    }

    fn step(&self, ctx: &UpdateContext<'_>, state: &mut ChainState) -> Result<()> {
        glauber_step(ctx.model, ctx.graph, state, self.lazy)
    }
}

struct BlockRule {
    selection: BlockSelection,
}

impl UpdateRule for BlockRule {
    fn name(&self) -> &str {
        match self.selection {
            BlockSelection::Uniform => "block-uniform",
            BlockSelection::VertexProportional => "block-vertex",
        }
    }

    fn step(&self, ctx: &UpdateContext<'_>, state: &mut ChainState) -> Result<()> {
        let partition = ctx
            .partition
            .ok_or_else(|| Error::invalid("block dynamics needs a partition"))?;
        block_step(ctx.model, ctx.graph, partition, state, self.selection)
    }
}

/// Name → update rule table.
pub struct DynamicsRegistry {
    rules: BTreeMap<String, Box<dyn UpdateRule>>,
}

impl DynamicsRegistry {
    pub fn empty() -> Self {
        Self {
            rules: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, rule: Box<dyn UpdateRule>) {
        self.rules.insert(rule.name().to_string(), rule);
    }

    pub fn get(&self, name: &str) -> Result<&dyn UpdateRule> {
        self.rules
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::invalid(format!("unknown dynamics {name:?}")))
    }

    pub fn names(&self) -> Vec<&str> {
        self.rules.keys().map(String::as_str).collect()
    }
}

impl Default for DynamicsRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Glauber { lazy: false }));
        r.register(Box::new(Glauber { lazy: true }));
        r.register(Box::new(BlockRule {
            selection: BlockSelection::Uniform,
        }));
        r.register(Box::new(BlockRule {
            selection: BlockSelection::VertexProportional,
        }));
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_vertex_step_is_uniform() {
        let m = SpinModel::coloring(3).unwrap();
        let g = Graph::empty(1);
        let mut counts = [0usize; 3];
        let mut st = ChainState::new(vec![0], 11);
        for _ in 0..30_000 {
            glauber_step(&m, &g, &mut st, false).unwrap();
            counts[st.config[0]] += 1;
        }
        for c in counts {
            assert!((c as f64 / 30_000.0 - 1.0 / 3.0).abs() < 0.015);
        }
    }

    #[test]
    fn frozen_triangle_never_moves() {
        let m = SpinModel::coloring(3).unwrap();
        let g = Graph::complete(3);
        let mut st = ChainState::new(vec![0, 1, 2], 5);
        for _ in 0..1000 {
            glauber_step(&m, &g, &mut st, false).unwrap();
            assert_eq!(st.config, vec![0, 1, 2]);
        }
    }

    #[test]
    fn registry_glauber_matches_run_chain() {
        let m = SpinModel::coloring(4).unwrap();
        let g = Graph::cycle(7);
        let start = vec![0, 1, 0, 1, 0, 1, 2];
        let reg = DynamicsRegistry::default();
        let ctx = UpdateContext {
            model: &m,
            graph: &g,
            partition: None,
        };
        for (name, lazy) in [("glauber", false), ("lazy-glauber", true)] {
            let a = run_chain(&m, &g, &start, 500, 3, lazy, Some(7)).unwrap();
            let st = ChainState::new(start.clone(), 3);
            let b = run_dynamics(reg.get(name).unwrap(), &ctx, st, 500, Some(7)).unwrap();
            assert_eq!(a.state.config, b.state.config);
            assert_eq!(a.trace, b.trace);
        }
    }

    #[test]
    fn run_chain_zero_steps_and_determinism() {
        let m = SpinModel::hardcore(0.3).unwrap();
        let g = Graph::cycle(6);
        let start = vec![0; 6];
        let r0 = run_chain(&m, &g, &start, 0, 9, true, None).unwrap();
        assert_eq!(r0.state.config, start);
        assert_eq!(r0.trace.len(), 1);
        let a = run_chain(&m, &g, &start, 5000, 9, true, None).unwrap();
        let b = run_chain(&m, &g, &start, 5000, 9, true, None).unwrap();
        assert_eq!(a.state.config, b.state.config);
        assert_eq!(a.trace, b.trace);
        assert!(m.is_feasible(&g, &a.state.config));
    }

    #[test]
    fn trace_csv_header() {
        let csv = trace_csv(&[TraceRow {
            step: 0,
            hamming: 0,
            occupied: 2,
        }]);
        assert_eq!(csv, "step,hamming,occupied\n0,0,2\n");
    }

    #[test]
    fn checkpoint_resume_matches_uninterrupted_run() {
        let m = SpinModel::coloring(5).unwrap();
        let g = Graph::cycle(8);
        let start = vec![0, 1, 0, 1, 0, 1, 0, 1];
        let mut a = ChainState::new(start.clone(), 3);
        for _ in 0..100 {
            glauber_step(&m, &g, &mut a, true).unwrap();
        }
        let mut b = ChainState::restore(&a.checkpoint()).unwrap();
        for _ in 0..100 {
            glauber_step(&m, &g, &mut a, true).unwrap();
            glauber_step(&m, &g, &mut b, true).unwrap();
        }
        assert_eq!(a.config, b.config);
        assert_eq!(a.step, b.step);
    }

    #[test]
    fn registry_lookup() {
        let r = DynamicsRegistry::default();
        assert_eq!(
            r.names(),
            vec!["block-uniform", "block-vertex", "glauber", "lazy-glauber"]
        );
        assert!(r.get("metropolis").is_err());
        let m = SpinModel::coloring(4).unwrap();
        let g = Graph::path(3);
        let ctx = UpdateContext {
            model: &m,
            graph: &g,
            partition: None,
        };
        let mut st = ChainState::new(vec![0, 1, 0], 1);
        r.get("lazy-glauber").unwrap().step(&ctx, &mut st).unwrap();
        assert!(r.get("block-uniform").unwrap().step(&ctx, &mut st).is_err());
    }
}
