//! The skeleton joint law `Q` and the composed law of a skeleton block.
//!
//! Each piece `U_i` hangs off its root `w_i ∈ W` as a tree. With the states
//! outside the block fixed, `p_{w_i}` is the root message of `U_i` computed
//! with every other block vertex ignored, and
//!
//! ```text
//! Q(σ_W) ∝ Π_{uv ∈ E(W)} exp(g(σ_u, σ_v)) · Π_i p_{w_i}(σ_{w_i})
//! ```
//!
//! Sampling `W` from `Q` and then each `U_i ∖ {w_i}` from its tree law given
//! `σ_W` reproduces the conditional law of the whole block.

use serde::{Deserialize, Serialize};

use super::ConditionalLaw;
use crate::decomposition::{Block, BlockKind, Piece};
use crate::dynamics::TreeMessages;
use crate::graph::Graph;
use crate::model::{Configuration, SpinModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkeletonJoint {
    /// skeleton vertices, sorted
    pub skeleton: Vec<usize>,
    /// states of `skeleton`, lexicographic
    pub states: Vec<Vec<usize>>,
    pub probs: Vec<f64>,
}

impl SkeletonJoint {
    pub fn prob_of(&self, s: &[usize]) -> f64 {
        let key: Vec<usize> = self.skeleton.iter().map(|&w| s[w]).collect();
        self.states
            .binary_search(&key)
            .map_or(0.0, |i| self.probs[i])
    }
}

fn block_parts(block: &Block) -> Result<(Vec<usize>, &[Piece])> {
    if block.kind != BlockKind::Skeleton {
        return Err(Error::invalid("not a skeleton block"));
    }
    let mut w = block
        .skeleton
        .clone()
        .ok_or_else(|| Error::invalid("skeleton block without skeleton"))?;
    w.sort_unstable();
    let pieces = block
        .pieces
        .as_deref()
        .ok_or_else(|| Error::invalid("skeleton block without pieces"))?;
    Ok((w, pieces))
}

pub fn skeleton_joint(
    m: &SpinModel,
    g: &Graph,
    block: &Block,
    s: &[usize],
    budget: u64,
) -> Result<SkeletonJoint> {
    let (w, pieces) = block_parts(block)?;
    let q = m.q();
    let size = (q as f64).powi(w.len() as i32);
    if size > budget as f64 {
        return Err(Error::BudgetExceeded {
            what: "skeleton states",
            reached: size.min(u64::MAX as f64) as u64,
            budget,
        });
    }
    let n = g.n();
    let in_block = g.mask(&block.vertices);
    let mut root_law: Vec<Vec<f64>> = vec![vec![1.0; q]; w.len()];
    for piece in pieces {
        let mut exclude = in_block.clone();
        for &v in &piece.vertices {
            exclude[v] = false;
        }
        let msgs = TreeMessages::compute_with(m, g, &piece.vertices, s, &[piece.root], Some(&exclude))?;
        let i = w
            .binary_search(&piece.root)
            .map_err(|_| Error::invalid("piece root outside the skeleton"))?;
        root_law[i] = msgs.message(0).to_vec();
    }
    let pos: Vec<usize> = {
        let mut pos = vec![usize::MAX; n];
        for (i, &v) in w.iter().enumerate() {
            pos[v] = i;
        }
        pos
    };
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for &u in &w {
        for &v in g.neighbors(u) {
            if pos[v] != usize::MAX && u < v {
                edges.push((pos[u], pos[v]));
            }
        }
    }

    let k = w.len();
    let mut states = Vec::new();
    let mut weights = Vec::new();
    let mut cur = vec![0usize; k];
    for idx in 0..q.pow(k as u32) {
        // last position fastest, so states come out sorted
        let mut r = idx;
        for x in cur.iter_mut().rev() {
            *x = r % q;
            r /= q;
        }
        let mut weight = 1.0;
        for (i, &x) in cur.iter().enumerate() {
            weight *= root_law[i][x];
        }
        for &(a, b) in &edges {
            let e = m.g(cur[a], cur[b]);
            weight *= if e == f64::NEG_INFINITY { 0.0 } else { e.exp() };
        }
        if weight > 0.0 {
            states.push(cur.clone());
            weights.push(weight);
        }
    }
    let z: f64 = weights.iter().sum();
    if states.is_empty() || z <= 0.0 {
        return Err(Error::BoundaryInfeasible);
    }
    Ok(SkeletonJoint {
        skeleton: w,
        states,
        probs: weights.into_iter().map(|x| x / z).collect(),
    })
}

/// Law of the whole block produced by drawing `W` from `Q` and then the
/// remaining tree vertices from their message tables, evaluated on the
/// block states of `law` (which should list every feasible block state).
pub fn skeleton_block_law(
    m: &SpinModel,
    g: &Graph,
    block: &Block,
    s: &[usize],
    law: &ConditionalLaw,
    budget: u64,
) -> Result<Vec<f64>> {
    let joint = skeleton_joint(m, g, block, s, budget)?;
    let rest: Vec<usize> = block
        .vertices
        .iter()
        .copied()
        .filter(|v| joint.skeleton.binary_search(v).is_err())
        .collect();
    let mut full: Configuration = s.to_vec();
    let mut out = Vec::with_capacity(law.states.len());
    let mut cache: std::collections::HashMap<Vec<usize>, Option<TreeMessages>> =
        std::collections::HashMap::new();
    for st in &law.states {
        for (&v, &x) in law.block.iter().zip(st) {
            full[v] = x;
        }
        let qw = joint.prob_of(&full);
        if qw == 0.0 {
            out.push(0.0);
            continue;
        }
        if rest.is_empty() {
            out.push(qw);
            continue;
        }
        let key: Vec<usize> = joint.skeleton.iter().map(|&w| full[w]).collect();
        let msgs = cache.entry(key).or_insert_with(|| {
            TreeMessages::compute(m, g, &rest, &full, &[]).ok()
        });
        out.push(msgs.as_ref().map_or(0.0, |t| qw * t.probability(&full)));
    }
    Ok(out)
}

/// One hand-built skeleton block with its model and outside states.
#[derive(Debug, Clone)]
pub struct SkeletonInstance {
    pub name: String,
    pub graph: Graph,
    pub model: SpinModel,
    pub block: Block,
    pub outside: Configuration,
}

fn piece(root: usize, vertices: &[usize]) -> Piece {
    let mut vertices = vertices.to_vec();
    vertices.sort_unstable();
    Piece { root, vertices }
}

fn skeleton_block(skeleton: &[usize], pieces: Vec<Piece>) -> Block {
    let mut vertices: Vec<usize> = pieces.iter().flat_map(|p| p.vertices.clone()).collect();
    vertices.sort_unstable();
    Block {
        kind: BlockKind::Skeleton,
        vertices,
        skeleton: Some(skeleton.to_vec()),
        pieces: Some(pieces),
    }
}

/// Ten small skeleton blocks covering triangles, squares, chorded cycles,
/// pendant trees of depth up to three, and outside boundary vertices under
/// coloring, hardcore and soft models.
pub fn skeleton_zoo() -> Vec<SkeletonInstance> {
    let mut out = Vec::new();
    let mut add = |name: &str, n: usize, edges: &[(usize, usize)], model: SpinModel, block: Block, outside: Vec<usize>| {
        let graph = Graph::from_edges(n, edges).expect("zoo graph");
        let mut cfg = vec![0; n];
        for (v, x) in outside.into_iter().enumerate() {
            cfg[v] = x;
        }
        out.push(SkeletonInstance {
            name: name.to_string(),
            graph,
            model,
            block,
            outside: cfg,
        });
    };
    let soft = SpinModel::soft(
        vec![0.1, -0.2, 0.05],
        vec![
            vec![0.3, -0.1, 0.2],
            vec![-0.1, 0.4, -0.25],
            vec![0.2, -0.25, 0.1],
        ],
    )
    .expect("soft model");

    // triangle, no trees
    add(
        "triangle-bare-q3",
        3,
        &[(0, 1), (1, 2), (0, 2)],
        SpinModel::coloring(3).unwrap(),
        skeleton_block(&[0, 1, 2], vec![piece(0, &[0]), piece(1, &[1]), piece(2, &[2])]),
        vec![],
    );
    // triangle with one pendant leaf
    add(
        "triangle-leaf-q3",
        4,
        &[(0, 1), (1, 2), (0, 2), (2, 3)],
        SpinModel::coloring(3).unwrap(),
        skeleton_block(&[0, 1, 2], vec![piece(0, &[0]), piece(1, &[1]), piece(2, &[2, 3])]),
        vec![],
    );
    // triangle with pendant paths and a fixed outside vertex
    add(
        "triangle-paths-boundary-q4",
        8,
        &[(0, 1), (1, 2), (0, 2), (0, 3), (3, 4), (1, 5), (5, 6), (6, 7)],
        SpinModel::coloring(4).unwrap(),
        skeleton_block(
            &[0, 1, 2],
            vec![piece(0, &[0, 3]), piece(1, &[1, 5]), piece(2, &[2])],
        ),
        vec![0, 0, 0, 0, 2, 0, 1, 3],
    );
    // square skeleton with a star hanging off one corner
    add(
        "square-star-q3",
        7,
        &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (0, 5), (0, 6)],
        SpinModel::coloring(3).unwrap(),
        skeleton_block(
            &[0, 1, 2, 3],
            vec![piece(0, &[0, 4, 5, 6]), piece(1, &[1]), piece(2, &[2]), piece(3, &[3])],
        ),
        vec![],
    );
    // chorded square, outside neighbours on two trees
    add(
        "chorded-square-q4",
        9,
        &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 4), (4, 5), (5, 6), (3, 7), (7, 8)],
        SpinModel::coloring(4).unwrap(),
        skeleton_block(
            &[0, 1, 2, 3],
            vec![piece(0, &[0]), piece(1, &[1, 4]), piece(2, &[2]), piece(3, &[3, 7])],
        ),
        vec![0, 0, 0, 0, 0, 1, 3, 0, 2],
    );
    // hardcore triangle with binary pendant trees
    add(
        "triangle-trees-hardcore",
        9,
        &[(0, 1), (1, 2), (0, 2), (0, 3), (0, 4), (3, 5), (3, 6), (1, 7), (2, 8)],
        SpinModel::hardcore(0.5).unwrap(),
        skeleton_block(
            &[0, 1, 2],
            vec![piece(0, &[0, 3, 4, 5, 6]), piece(1, &[1, 7]), piece(2, &[2, 8])],
        ),
        vec![],
    );
    // hardcore pentagon, one outside vertex occupied
    add(
        "pentagon-hardcore-boundary",
        7,
        &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (2, 5), (5, 6)],
        SpinModel::hardcore(1.0).unwrap(),
        skeleton_block(
            &[0, 1, 2, 3, 4],
            vec![piece(0, &[0]), piece(1, &[1]), piece(2, &[2, 5]), piece(3, &[3]), piece(4, &[4])],
        ),
        vec![0, 0, 0, 0, 0, 0, 1],
    );
    // soft triangle with a depth-three path
    add(
        "triangle-path-soft",
        6,
        &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5)],
        soft.clone(),
        skeleton_block(&[0, 1, 2], vec![piece(0, &[0]), piece(1, &[1]), piece(2, &[2, 3, 4, 5])]),
        vec![],
    );
    // soft square with outside neighbours fixed to distinct states
    add(
        "square-soft-boundary",
        8,
        &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (4, 5), (2, 6), (6, 7)],
        soft,
        skeleton_block(
            &[0, 1, 2, 3],
            vec![piece(0, &[0, 4]), piece(1, &[1]), piece(2, &[2, 6]), piece(3, &[3])],
        ),
        vec![0, 0, 0, 0, 0, 2, 0, 1],
    );
    // two triangles sharing a vertex, coloring q=5
    add(
        "bowtie-q5",
        8,
        &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4), (0, 5), (4, 6), (6, 7)],
        SpinModel::coloring(5).unwrap(),
        skeleton_block(
            &[0, 1, 2, 3, 4],
            vec![
                piece(0, &[0, 5]),
                piece(1, &[1]),
                piece(2, &[2]),
                piece(3, &[3]),
                piece(4, &[4, 6]),
            ],
        ),
        vec![0, 0, 0, 0, 0, 0, 0, 4],
    );
    out
}
