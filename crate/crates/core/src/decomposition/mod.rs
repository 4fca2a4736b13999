//! Good/bad vertices, skeletons and block partitions.
//!
//! A vertex is `(c, α, ε)`-good when its degree is at most `c` and
//! `φ_α(v) ≤ ε`. Bad vertices are grouped by the relation "joined by a path
//! with no two consecutive good vertices", and good vertices are attached to
//! the class of the bad vertices next to them. Short cycles and the short
//! paths between them form the skeleton `W`; each skeleton component `W_j`
//! collects the classes within distance `⌈L log n⌉` into a block `V_j`, which
//! hangs off `W_j` as a set of trees `U_i` rooted at `w_i ∈ W_j`. Whatever is
//! left becomes tree or singleton blocks.

mod blocks;
mod skeleton;

use std::collections::VecDeque;
use std::path::Path;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{alpha_weight, Graph, HypothesisParams, LogBase};
use crate::{Error, Result};

pub use blocks::{build_blocks, validate_partition, PARTITION_CHECKS};
pub use skeleton::{
    build_skeleton, find_rule_application, path_cut_violation, RuleApplication, ScanOrder,
    Skeleton, SkeletonParams,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoodBadLabeling {
    pub good: Vec<bool>,
    pub c: f64,
    pub alpha: f64,
    pub eps: f64,
    pub phi: Vec<f64>,
}

impl GoodBadLabeling {
    pub fn is_good(&self, v: usize) -> bool {
        self.good[v]
    }

    pub fn bad_count(&self) -> usize {
        self.good.iter().filter(|&&g| !g).count()
    }

    /// Every vertex good; useful for structural tests where only the
    /// skeleton rules matter.
    pub fn all_good(n: usize) -> Self {
        Self {
            good: vec![true; n],
            c: f64::INFINITY,
            alpha: 0.5,
            eps: f64::INFINITY,
            phi: vec![0.0; n],
        }
    }
}

/// Labels every vertex. With a positive `tail_tolerance`, a vertex whose
/// truncated weight lies within the reported error of `ε` is resolved by an
/// exact traversal, so the labeling is always exact.
pub fn classify(
    g: &Graph,
    c: f64,
    alpha: f64,
    eps: f64,
    tail_tolerance: f64,
) -> Result<GoodBadLabeling> {
    if !(alpha > 0.0 && alpha < 1.0) || !(eps > 0.0) || !(c >= 0.0) {
        return Err(Error::invalid("classify needs c >= 0, 0 < alpha < 1, eps > 0"));
    }
    let phi: Vec<f64> = (0..g.n())
        .into_par_iter()
        .map(|v| {
            let w = alpha_weight(g, v, alpha, tail_tolerance);
            if w.value <= eps && w.value + w.error_bound > eps {
                alpha_weight(g, v, alpha, 0.0).value
            } else {
                w.value
            }
        })
        .collect();
    let good = (0..g.n())
        .map(|v| g.degree(v) as f64 <= c && phi[v] <= eps)
        .collect();
    Ok(GoodBadLabeling {
        good,
        c,
        alpha,
        eps,
        phi,
    })
}

/// `ε = 3δ/L` and `c = ε/α`.
pub fn choose_params(hp: &HypothesisParams, l_block: f64) -> Result<(f64, f64)> {
    hp.validate()?;
    if !(l_block > 0.0) {
        return Err(Error::invalid("block scale L must be positive"));
    }
    if l_block > hp.a {
        return Err(Error::invalid(format!("block scale L={l_block} exceeds a={}", hp.a)));
    }
    let eps = 3.0 * hp.delta / l_block;
    Ok((eps / hp.alpha, eps))
}

/// `0.9 · a / (20t + 2)`, which keeps `(20t + 2) L < a`.
pub fn default_block_scale(hp: &HypothesisParams) -> f64 {
    0.9 * hp.a / (20.0 * hp.t as f64 + 2.0)
}

/// Everything produced by [`decompose`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Decomposition {
    pub labeling: GoodBadLabeling,
    pub skeleton: Skeleton,
    pub partition: BlockPartition,
    pub checks: Vec<crate::report::CheckRecord>,
}

impl Decomposition {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Labels vertices with `(c, ε)` from [`choose_params`], builds the
/// skeleton and blocks, and validates the result. `l_block` defaults to
/// [`default_block_scale`]; `path_budget` caps the path-cut enumeration.
pub fn decompose(
    g: &Graph,
    hp: &HypothesisParams,
    l_block: Option<f64>,
    log_base: LogBase,
    order: ScanOrder,
    path_budget: u64,
) -> Result<Decomposition> {
    let l_block = l_block.unwrap_or_else(|| default_block_scale(hp));
    let (c, eps) = choose_params(hp, l_block)?;
    let labeling = classify(g, c, hp.alpha, eps, 1e-12)?;
    let mut sp = SkeletonParams::new(l_block, hp.t);
    sp.log_base = log_base;
    sp.order = order;
    sp.path_budget = path_budget;
    let skeleton = build_skeleton(g, &labeling, &sp)?;
    let partition = build_blocks(g, &labeling, &skeleton, &sp)?;
    let checks = validate_partition(g, &partition, &labeling);
    Ok(Decomposition {
        labeling,
        skeleton,
        partition,
        checks,
    })
}

/// Classes of bad vertices, each sorted, ordered by smallest member.
pub fn bad_classes(g: &Graph, labeling: &GoodBadLabeling) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if labeling.good[s] || seen[s] {
            continue;
        }
        seen[s] = true;
        let mut class = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &w in g.neighbors(u) {
                if !labeling.good[w] {
                    if !seen[w] {
                        seen[w] = true;
                        class.push(w);
                        queue.push_back(w);
                    }
                } else {
                    for &x in g.neighbors(w) {
                        if !labeling.good[x] && !seen[x] {
                            seen[x] = true;
                            class.push(x);
                            queue.push_back(x);
                        }
                    }
                }
            }
        }
        class.sort_unstable();
        out.push(class);
    }
    out
}

/// Class index for every vertex: bad classes first (in [`bad_classes`]
/// order), then a good vertex takes the class of its bad neighbours or, with
/// none, a fresh singleton class.
pub fn extended_classes(g: &Graph, labeling: &GoodBadLabeling) -> Result<Vec<usize>> {
    let n = g.n();
    let mut class = vec![usize::MAX; n];
    let bad = bad_classes(g, labeling);
    let mut next = bad.len();
    for (i, c) in bad.iter().enumerate() {
        for &v in c {
            class[v] = i;
        }
    }
    for v in 0..n {
        if !labeling.good[v] {
            continue;
        }
        let mut found = usize::MAX;
        for &w in g.neighbors(v) {
            if labeling.good[w] {
                continue;
            }
            if found == usize::MAX {
                found = class[w];
            } else if found != class[w] {
                return Err(Error::LabelingInconsistency { vertex: v });
            }
        }
        class[v] = if found == usize::MAX {
            next += 1;
            next - 1
        } else {
            found
        };
    }
    Ok(class)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    Tree,
    Skeleton,
    Singleton,
    /// Any vertex set, resampled by enumeration. Never produced by
    /// [`build_blocks`].
    General,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub root: usize,
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub kind: BlockKind,
    pub vertices: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skeleton: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pieces: Option<Vec<Piece>>,
}

impl Block {
    pub fn singleton(v: usize) -> Self {
        Self {
            kind: BlockKind::Singleton,
            vertices: vec![v],
            skeleton: None,
            pieces: None,
        }
    }

    pub fn tree(mut vertices: Vec<usize>) -> Self {
        vertices.sort_unstable();
        Self {
            kind: if vertices.len() == 1 {
                BlockKind::Singleton
            } else {
                BlockKind::Tree
            },
            vertices,
            skeleton: None,
            pieces: None,
        }
    }

    pub fn general(mut vertices: Vec<usize>) -> Self {
        vertices.sort_unstable();
        Self {
            kind: BlockKind::General,
            vertices,
            skeleton: None,
            pieces: None,
        }
    }
}

/// Parameters recorded with a partition so that it can be validated later.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionParams {
    pub l_block: f64,
    pub t: u32,
    pub log_base: LogBase,
    pub c: f64,
    pub alpha: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BlockPartition {
    pub blocks: Vec<Block>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<PartitionParams>,
    #[serde(skip)]
    owner: OnceLock<Vec<usize>>,
}

impl PartialEq for BlockPartition {
    fn eq(&self, other: &Self) -> bool {
        self.blocks == other.blocks && self.params == other.params
    }
}

impl BlockPartition {
    pub fn new(blocks: Vec<Block>, params: Option<PartitionParams>) -> Self {
        Self {
            blocks,
            params,
            owner: OnceLock::new(),
        }
    }

    /// One singleton block per vertex.
    pub fn singletons(n: usize) -> Self {
        Self::new((0..n).map(Block::singleton).collect(), None)
    }

    /// Block index of every vertex (`usize::MAX` if uncovered).
    pub fn owner(&self, n: usize) -> &[usize] {
        self.owner.get_or_init(|| {
            let mut o = vec![usize::MAX; n];
            for (j, b) in self.blocks.iter().enumerate() {
                for &v in &b.vertices {
                    if v < n {
                        o[v] = j;
                    }
                }
            }
            o
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("partition serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labeling(good: Vec<bool>) -> GoodBadLabeling {
        let n = good.len();
        GoodBadLabeling {
            good,
            c: 1.0,
            alpha: 0.5,
            eps: 1.0,
            phi: vec![0.0; n],
        }
    }

    #[test]
    fn classify_examples() {
        let l = classify(&Graph::empty(1), 0.0, 0.5, 0.1, 0.0).unwrap();
        assert!(l.good[0]);
        let l = classify(&Graph::star(4), 3.0, 0.5, 100.0, 0.0).unwrap();
        assert!(!l.good[0]);
        assert!(l.good[1]);
        let l = classify(&Graph::path(3), 2.0, 0.5, 0.9, 0.0).unwrap();
        assert_eq!(l.good, vec![true, false, true]);
    }

    #[test]
    fn classify_truncation_matches_exact() {
        let g = crate::graph::generate_er(400, 2.5, 8).unwrap();
        let exact = classify(&g, 6.0, 0.4, 1.3, 0.0).unwrap();
        let trunc = classify(&g, 6.0, 0.4, 1.3, 1e-3).unwrap();
        assert_eq!(exact.good, trunc.good);
    }

    #[test]
    fn choose_params_examples() {
        let hp = HypothesisParams {
            a: 2.0,
            alpha: 0.5,
            t: 1,
            delta: 1.0,
        };
        assert_eq!(choose_params(&hp, 1.0).unwrap(), (6.0, 3.0));
        let hp2 = HypothesisParams {
            a: 1.0,
            alpha: 0.25,
            t: 1,
            delta: 0.3,
        };
        let (c, eps) = choose_params(&hp2, 0.1).unwrap();
        assert!((eps - 9.0).abs() < 1e-12);
        assert!((c - 36.0).abs() < 1e-12);
        assert!(choose_params(&hp, 2.5).is_err());
    }

    #[test]
    fn bad_class_examples() {
        let p = Graph::path(2);
        assert!(bad_classes(&p, &labeling(vec![true, true])).is_empty());
        assert_eq!(bad_classes(&p, &labeling(vec![false, false])), vec![vec![0, 1]]);
        let p4 = Graph::path(4);
        assert_eq!(
            bad_classes(&p4, &labeling(vec![false, true, true, false])),
            vec![vec![0], vec![3]]
        );
        let p3 = Graph::path(3);
        assert_eq!(bad_classes(&p3, &labeling(vec![false, true, false])), vec![vec![0, 2]]);
    }

    #[test]
    fn extended_classes_attach_good_vertices() {
        // bad 0 - good 1 - good 2 - bad 3, plus isolated good 4
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let cls = extended_classes(&g, &labeling(vec![false, true, true, false, true])).unwrap();
        assert_eq!(cls[0], cls[1]);
        assert_eq!(cls[2], cls[3]);
        assert_ne!(cls[0], cls[3]);
        assert_ne!(cls[4], cls[0]);
        assert_ne!(cls[4], cls[3]);
    }

    #[test]
    fn partition_json_round_trip() {
        let p = BlockPartition::new(
            vec![
                Block {
                    kind: BlockKind::Skeleton,
                    vertices: vec![0, 1, 2, 3],
                    skeleton: Some(vec![0, 1, 2]),
                    pieces: Some(vec![
                        Piece {
                            root: 0,
                            vertices: vec![0, 3],
                        },
                        Piece {
                            root: 1,
                            vertices: vec![1],
                        },
                        Piece {
                            root: 2,
                            vertices: vec![2],
                        },
                    ]),
                },
                Block::singleton(4),
            ],
            Some(PartitionParams {
                l_block: 0.3,
                t: 1,
                log_base: LogBase::E,
                c: 2.0,
                alpha: 0.5,
                eps: 1.0,
            }),
        );
        let text = p.to_json();
        let back = BlockPartition::from_json(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.to_json(), text);
        assert_eq!(back.owner(5), &[0, 0, 0, 0, 1]);
    }
}
