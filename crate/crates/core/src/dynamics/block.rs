use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{ChainState, TreeMessages};
use crate::decomposition::{Block, BlockKind, BlockPartition};
use crate::exact::{conditional_law, skeleton_joint, DEFAULT_STATE_BUDGET};
use crate::graph::Graph;
use crate::model::SpinModel;
use crate::rng::{self, Rng};
use crate::Result;

/// How block dynamics picks the block to resample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockSelection {
    /// Each block with probability `1/K`.
    #[default]
    Uniform,
    /// The block containing a uniformly chosen vertex.
    VertexProportional,
}

/// Picks a block and replaces its states by an exact draw from the
/// conditional law given everything outside it.
pub fn block_step(
    m: &SpinModel,
    g: &Graph,
    partition: &BlockPartition,
    state: &mut ChainState,
    selection: BlockSelection,
) -> Result<()> {
    state.step += 1;
    let k = partition.blocks.len();
    if k == 0 {
        return Ok(());
    }
    let j = match selection {
        BlockSelection::Uniform => state.rng.random_range(0..k),
        BlockSelection::VertexProportional => {
            let v = state.rng.random_range(0..g.n());
            partition.owner(g.n())[v]
        }
    };
    resample_block(m, g, &partition.blocks[j], &mut state.config, &mut state.rng)
}

pub(crate) fn resample_block(
    m: &SpinModel,
    g: &Graph,
    block: &Block,
    s: &mut [usize],
    rng: &mut Rng,
) -> Result<()> {
    match block.kind {
        BlockKind::Singleton | BlockKind::Tree => {
            TreeMessages::compute(m, g, &block.vertices, s, &[])?.sample(s, rng);
        }
        BlockKind::Skeleton => {
            let joint = skeleton_joint(m, g, block, s, DEFAULT_STATE_BUDGET)?;
            let pick = rng::sample_index(&joint.probs, rng.random::<f64>());
            for (&w, &x) in joint.skeleton.iter().zip(&joint.states[pick]) {
                s[w] = x;
            }
            let rest: Vec<usize> = block
                .vertices
                .iter()
                .copied()
                .filter(|v| !joint.skeleton.contains(v))
                .collect();
            if !rest.is_empty() {
                TreeMessages::compute(m, g, &rest, s, &[])?.sample(s, rng);
            }
        }
        BlockKind::General => {
            let law = conditional_law(m, g, &block.vertices, s, DEFAULT_STATE_BUDGET)?;
            let pick = rng::sample_index(&law.probs, rng.random::<f64>());
            for (&v, &x) in block.vertices.iter().zip(&law.states[pick]) {
                s[v] = x;
            }
        }
    }
    Ok(())
}
