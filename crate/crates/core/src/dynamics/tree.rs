//! Exact conditional sampling on forest-shaped blocks.
//!
//! For a block inducing a forest, with every vertex outside the block held
//! fixed, the conditional Gibbs law factorizes along the forest. The upward
//! pass stores for each block vertex `u` and state `x` the normalized weight
//!
//! ```text
//! m_u(x) ∝ exp(h(x) + Σ_{w ∉ block, w ~ u} g(σ(w), x)) · Π_{children c} Σ_y exp(g(x,y)) m_c(y)
//! ```
//!
//! and the downward pass samples each root from `m_root` and each child `c`
//! of a vertex in state `x` from `exp(g(x,·)) m_c(·)`.

use rand::Rng as _;

use crate::graph::Graph;
use crate::model::{ModelKind, SpinModel};
use crate::rng::{self, Rng};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct TreeMessages {
    q: usize,
    /// block vertices in breadth-first order, roots first within each tree
    order: Vec<usize>,
    /// position in `order` of the parent, `usize::MAX` for roots
    parent: Vec<usize>,
    /// `m_u` for `order[i]` at `[i*q .. (i+1)*q]`
    msg: Vec<f64>,
    exp_g: Vec<f64>,
}

impl TreeMessages {
    /// Messages for `block` given the states in `s` outside the block.
    /// Each tree is rooted at its smallest vertex unless it contains a vertex
    /// listed in `roots`.
    pub fn compute(
        m: &SpinModel,
        g: &Graph,
        block: &[usize],
        s: &[usize],
        roots: &[usize],
    ) -> Result<Self> {
        Self::compute_with(m, g, block, s, roots, None)
    }

    /// As [`TreeMessages::compute`], ignoring outside neighbours `w` with
    /// `exclude[w]` set (their interaction is treated as absent).
    pub fn compute_with(
        m: &SpinModel,
        g: &Graph,
        block: &[usize],
        s: &[usize],
        roots: &[usize],
        exclude: Option<&[bool]>,
    ) -> Result<Self> {
        let q = m.q();
        let n = g.n();
        let mut pos = vec![usize::MAX; n];
        let mut sorted = block.to_vec();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::invalid("duplicate vertex in block"));
            }
        }
        let mut in_block = vec![false; n];
        for &v in block {
            in_block[v] = true;
        }

        let mut order = Vec::with_capacity(block.len());
        let mut parent = Vec::with_capacity(block.len());
        let mut start_order: Vec<usize> = roots.iter().copied().filter(|&r| in_block[r]).collect();
        start_order.extend(sorted.iter().copied());
        for r in start_order {
            if pos[r] != usize::MAX {
                continue;
            }
            pos[r] = order.len();
            order.push(r);
            parent.push(usize::MAX);
            let mut i = order.len() - 1;
            while i < order.len() {
                let u = order[i];
                for &w in g.neighbors(u) {
                    if !in_block[w] {
                        continue;
                    }
                    if pos[w] == usize::MAX {
                        pos[w] = order.len();
                        order.push(w);
                        parent.push(i);
                    } else if parent[i] != pos[w] && parent[pos[w]] != i {
                        return Err(Error::NotAForest { witness: w });
                    }
                }
                i += 1;
            }
        }

        let exp_g: Vec<f64> = (0..q * q)
            .map(|k| {
                let x = m.g(k / q, k % q);
                if x == f64::NEG_INFINITY {
                    0.0
                } else {
                    x.exp()
                }
            })
            .collect();

        let mut msg = vec![0.0; order.len() * q];
        // local factors in log space
        for (i, &u) in order.iter().enumerate() {
            let row = &mut msg[i * q..(i + 1) * q];
            for (x, r) in row.iter_mut().enumerate() {
                *r = m.h(x);
            }
            for &w in g.neighbors(u) {
                if in_block[w] || exclude.is_some_and(|e| e[w]) {
                    continue;
                }
                for (x, r) in row.iter_mut().enumerate() {
                    *r += m.g(s[w], x);
                }
            }
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if max == f64::NEG_INFINITY {
                return Err(Error::BoundaryInfeasible);
            }
            for r in row.iter_mut() {
                *r = if *r == f64::NEG_INFINITY { 0.0 } else { (*r - max).exp() };
            }
        }
        // upward pass, leaves first
        let coloring = m.kind() == ModelKind::Coloring;
        let mut child_sum = vec![0.0; q];
        for i in (0..order.len()).rev() {
            let row_sum: f64 = msg[i * q..(i + 1) * q].iter().sum();
            if row_sum <= 0.0 || !row_sum.is_finite() {
                return Err(Error::BoundaryInfeasible);
            }
            for r in &mut msg[i * q..(i + 1) * q] {
                *r /= row_sum;
            }
            let p = parent[i];
            if p == usize::MAX {
                continue;
            }
            let child = &msg[i * q..(i + 1) * q];
            if coloring {
                // Σ_{y≠x} m_c(y) = 1 − m_c(x)
                for (x, c) in child_sum.iter_mut().enumerate() {
                    *c = (1.0 - child[x]).max(0.0);
                }
            } else {
                for (x, c) in child_sum.iter_mut().enumerate() {
                    *c = (0..q).map(|y| exp_g[x * q + y] * child[y]).sum();
                }
            }
            for x in 0..q {
                msg[p * q + x] *= child_sum[x];
            }
        }

        Ok(Self {
            q,
            order,
            parent,
            msg,
            exp_g,
        })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Normalized `m_u` of the `i`-th vertex in breadth-first order. For a
    /// root this is its exact conditional marginal.
    pub fn message(&self, i: usize) -> &[f64] {
        &self.msg[i * self.q..(i + 1) * self.q]
    }

    /// Marginal of the root of the tree containing `order()[0]`.
    pub fn root_marginal(&self) -> &[f64] {
        self.message(0)
    }

    fn child_law(&self, i: usize, parent_state: usize, out: &mut [f64]) {
        let q = self.q;
        let mut total = 0.0;
        for y in 0..q {
            out[y] = self.exp_g[parent_state * q + y] * self.msg[i * q + y];
            total += out[y];
        }
        for o in out.iter_mut() {
            *o /= total;
        }
    }

    /// Writes an exact sample into `s` at the block vertices.
    pub fn sample(&self, s: &mut [usize], rng: &mut Rng) {
        let mut buf = vec![0.0; self.q];
        for (i, &u) in self.order.iter().enumerate() {
            let u01 = rng.random::<f64>();
            s[u] = if self.parent[i] == usize::MAX {
                rng::sample_index(self.message(i), u01)
            } else {
                self.child_law(i, s[self.order[self.parent[i]]], &mut buf);
                rng::sample_index(&buf, u01)
            };
        }
    }

    /// Probability that [`TreeMessages::sample`] writes the block states
    /// found in `s`: the product of the root and child laws.
    pub fn probability(&self, s: &[usize]) -> f64 {
        let mut buf = vec![0.0; self.q];
        let mut p = 1.0;
        for (i, &u) in self.order.iter().enumerate() {
            p *= if self.parent[i] == usize::MAX {
                self.message(i)[s[u]]
            } else {
                self.child_law(i, s[self.order[self.parent[i]]], &mut buf);
                buf[s[u]]
            };
        }
        p
    }
}

/// Resamples the forest `block` in place from its exact conditional law.
pub fn tree_block_sample(
    m: &SpinModel,
    g: &Graph,
    block: &[usize],
    s: &mut [usize],
    rng: &mut Rng,
) -> Result<()> {
    let t = TreeMessages::compute(m, g, block, s, &[])?;
    t.sample(s, rng);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_vertex_block_matches_local_conditional() {
        let m = SpinModel::coloring(5).unwrap();
        let g = Graph::star(2);
        let s = vec![0, 1, 2];
        let t = TreeMessages::compute(&m, &g, &[0], &s, &[]).unwrap();
        let local = m.local_conditional(&g, &s, 0).unwrap();
        for x in 0..5 {
            assert!((t.root_marginal()[x] - local[x]).abs() < 1e-15);
        }
    }

    #[test]
    fn edge_two_colorings_uniform() {
        let m = SpinModel::coloring(2).unwrap();
        let g = Graph::path(2);
        let t = TreeMessages::compute(&m, &g, &[0, 1], &[0, 0], &[]).unwrap();
        assert!((t.probability(&[0, 1]) - 0.5).abs() < 1e-15);
        assert!((t.probability(&[1, 0]) - 0.5).abs() < 1e-15);
        assert_eq!(t.probability(&[0, 0]), 0.0);
    }

    #[test]
    fn cycle_block_rejected() {
        let m = SpinModel::coloring(4).unwrap();
        let g = Graph::cycle(4);
        assert!(matches!(
            TreeMessages::compute(&m, &g, &[0, 1, 2, 3], &[0; 4], &[]),
            Err(Error::NotAForest { .. })
        ));
    }

    #[test]
    fn infeasible_boundary_detected() {
        // center 0 of a star with three leaves coloured 0,1,2 and q = 3
        let m = SpinModel::coloring(3).unwrap();
        let g = Graph::star(3);
        assert!(matches!(
            TreeMessages::compute(&m, &g, &[0], &[0, 0, 1, 2], &[]),
            Err(Error::BoundaryInfeasible)
        ));
    }

    #[test]
    fn requested_root_is_used() {
        let m = SpinModel::hardcore(0.4).unwrap();
        let g = Graph::path(4);
        let t = TreeMessages::compute(&m, &g, &[0, 1, 2, 3], &[0; 4], &[2]).unwrap();
        assert_eq!(t.order()[0], 2);
    }
}
