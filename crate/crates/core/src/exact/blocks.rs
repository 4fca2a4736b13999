//! Exact block dynamics and the block composition inequality
//! `τ ≤ τ_block · max_i τ_i · max_v #{j : v ∈ V_j}`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::seq::IteratorRandom;
use serde::{Deserialize, Serialize};

use super::{conditional_law, relaxation_time, spectral_gap, ExactChain};
use crate::decomposition::BlockPartition;
use crate::graph::Graph;
use crate::model::SpinModel;
use crate::report::BoundRecord;
use crate::rng;
use crate::{Error, Result};

/// Cap on boundary conditions examined per block before sampling.
pub const BOUNDARY_CAP: usize = 10_000;

/// Transition matrix of block dynamics over the states of `chain`: pick one
/// of the `K` blocks uniformly and redraw it from its conditional law.
pub fn block_transition_matrix(
    chain: &ExactChain,
    m: &SpinModel,
    g: &Graph,
    partition: &BlockPartition,
    budget: u64,
) -> Result<DMatrix<f64>> {
    let size = chain.len();
    let k = partition.blocks.len();
    if k == 0 {
        return Err(Error::invalid("empty partition"));
    }
    let mut p = DMatrix::zeros(size, size);
    for (i, s) in chain.states.iter().enumerate() {
        for block in &partition.blocks {
            let law = conditional_law(m, g, &block.vertices, s, budget)?;
            let mut t = s.clone();
            for (st, &pr) in law.states.iter().zip(&law.probs) {
                for (&v, &x) in block.vertices.iter().zip(st) {
                    t[v] = x;
                }
                let j = chain
                    .index_of(&t)
                    .ok_or_else(|| Error::invalid("block law left the state space"))?;
                p[(i, j)] += pr / k as f64;
            }
        }
    }
    Ok(p)
}

/// Relaxation time of Glauber dynamics restricted to `block` (a uniform
/// block vertex is redrawn each step) given the outside states in `s`.
/// A reducible restricted chain has infinite relaxation time.
fn restricted_relaxation_time(
    m: &SpinModel,
    g: &Graph,
    block: &[usize],
    s: &[usize],
    budget: u64,
) -> Result<f64> {
    let law = conditional_law(m, g, block, s, budget)?;
    let size = law.states.len();
    if size == 1 {
        return Ok(1.0);
    }
    let index: BTreeMap<&[usize], usize> = law
        .states
        .iter()
        .enumerate()
        .map(|(i, st)| (st.as_slice(), i))
        .collect();
    let mut p = DMatrix::zeros(size, size);
    let mut full = s.to_vec();
    let mut buf = vec![0.0; m.q()];
    let b = block.len() as f64;
    for (i, st) in law.states.iter().enumerate() {
        for (&v, &x) in block.iter().zip(st) {
            full[v] = x;
        }
        let mut key = st.clone();
        for (pos, &v) in block.iter().enumerate() {
            m.local_conditional_into(g, &full, v, &mut buf)?;
            for (x, &px) in buf.iter().enumerate() {
                if px > 0.0 {
                    key[pos] = x;
                    p[(i, index[key.as_slice()])] += px / b;
                }
            }
            key[pos] = st[pos];
        }
    }
    match spectral_gap(&p, &law.probs) {
        Ok(gap) => Ok(1.0 / gap),
        Err(Error::DegenerateChain(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RestrictedTimes {
    /// worst relaxation time per block
    pub tau: Vec<f64>,
    /// boundary conditions examined per block
    pub boundaries: Vec<usize>,
    /// whether a block had more than [`BOUNDARY_CAP`] boundary conditions
    /// and was sampled
    pub sampled: bool,
}

/// Worst relaxation time of the restricted Glauber chain of each block,
/// over the outside configurations that occur in feasible states.
pub fn restricted_relaxation_times(
    chain: &ExactChain,
    m: &SpinModel,
    g: &Graph,
    partition: &BlockPartition,
    budget: u64,
    seed: u64,
) -> Result<RestrictedTimes> {
    let mut r = rng::seeded(seed);
    let mut out = RestrictedTimes {
        tau: Vec::new(),
        boundaries: Vec::new(),
        sampled: false,
    };
    for block in &partition.blocks {
        let inside = g.mask(&block.vertices);
        let ext: Vec<usize> = {
            let mut e: Vec<usize> = block
                .vertices
                .iter()
                .flat_map(|&v| g.neighbors(v).iter().copied())
                .filter(|&w| !inside[w])
                .collect();
            e.sort_unstable();
            e.dedup();
            e
        };
        // one representative full state per exterior-boundary assignment
        let mut groups: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for (i, st) in chain.states.iter().enumerate() {
            groups.entry(ext.iter().map(|&w| st[w]).collect()).or_insert(i);
        }
        let mut reps: Vec<usize> = groups.into_values().collect();
        if reps.len() > BOUNDARY_CAP {
            out.sampled = true;
            reps = reps.into_iter().choose_multiple(&mut r, BOUNDARY_CAP);
        }
        let mut worst: f64 = 0.0;
        for &i in &reps {
            let t = restricted_relaxation_time(m, g, &block.vertices, &chain.states[i], budget)?;
            worst = worst.max(t);
        }
        out.tau.push(worst);
        out.boundaries.push(reps.len());
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockCompositionReport {
    pub tau: f64,
    pub tau_block: f64,
    pub tau_blocks: Vec<f64>,
    pub multiplicity: usize,
    pub bound: f64,
    pub boundaries_sampled: bool,
    pub pass: bool,
}

impl BlockCompositionReport {
    pub fn record(&self, instance: &str, tol: f64) -> BoundRecord {
        let mut r = BoundRecord::upper(instance, "block_composition", self.bound, self.tau, tol);
        if self.boundaries_sampled {
            r = r.with_note("boundary conditions sampled");
        }
        r
    }
}

/// Compares the exact relaxation time of the (non-lazy) Glauber chain in
/// `chain` with `τ_block · max_i τ_i · multiplicity`.
pub fn block_composition_check(
    chain: &ExactChain,
    m: &SpinModel,
    g: &Graph,
    partition: &BlockPartition,
    budget: u64,
    seed: u64,
) -> Result<BlockCompositionReport> {
    let tau = relaxation_time(chain)?;
    let pb = block_transition_matrix(chain, m, g, partition, budget)?;
    let tau_block = 1.0 / spectral_gap(&pb, &chain.stationary)?;
    let times = restricted_relaxation_times(chain, m, g, partition, budget, seed)?;
    let mut count = vec![0usize; g.n()];
    for b in &partition.blocks {
        for &v in &b.vertices {
            count[v] += 1;
        }
    }
    let multiplicity = count.iter().copied().max().unwrap_or(0);
    let max_tau = times.tau.iter().cloned().fold(0.0, f64::max);
    let bound = tau_block * max_tau * multiplicity as f64;
    Ok(BlockCompositionReport {
        tau,
        tau_block,
        tau_blocks: times.tau,
        multiplicity,
        bound,
        boundaries_sampled: times.sampled,
        pass: tau <= bound + 1e-9,
    })
}
