use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Graph;
use crate::{Error, Result};

/// Default DFS node budget for maximal path weight enumeration.
pub const DEFAULT_PATH_BUDGET: u64 = 100_000_000;

/// `φ_α(v)` together with an upper bound on the truncated tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaWeight {
    pub value: f64,
    pub error_bound: f64,
    pub radius: usize,
}

/// `φ_α(v) = Σ_{u≠v} α^{d(v,u)}`.
///
/// Breadth-first layers are summed until `α^{R+1}·n < tail_tolerance`; the
/// unvisited vertices then contribute at most `(n − visited)·α^{R+1}`, which
/// is reported as `error_bound`. A tolerance of zero traverses the whole
/// component.
pub fn alpha_weight(g: &Graph, v: usize, alpha: f64, tail_tolerance: f64) -> AlphaWeight {
    let n = g.n();
    let mut seen = vec![false; n];
    seen[v] = true;
    let mut frontier = vec![v];
    let mut next = Vec::new();
    let mut visited = 1usize;
    let mut value = 0.0;
    let mut pow = 1.0;
    let mut radius = 0;
    loop {
        next.clear();
        for &u in &frontier {
            for &w in g.neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return AlphaWeight {
                value,
                error_bound: 0.0,
                radius,
            };
        }
        pow *= alpha;
        radius += 1;
        visited += next.len();
        value += pow * next.len() as f64;
        std::mem::swap(&mut frontier, &mut next);
        let tail = pow * alpha;
        if tail_tolerance > 0.0 && tail * n as f64 <= tail_tolerance {
            return AlphaWeight {
                value,
                error_bound: tail * (n - visited) as f64,
                radius,
            };
        }
    }
}

/// `φ_α` for every vertex, computed in parallel and returned in vertex order.
pub fn alpha_weights(g: &Graph, alpha: f64, tail_tolerance: f64) -> Vec<AlphaWeight> {
    (0..g.n())
        .into_par_iter()
        .map(|v| alpha_weight(g, v, alpha, tail_tolerance))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathWeight {
    pub value: f64,
    pub path: Vec<usize>,
    pub nodes: u64,
}

/// `m_α(G, l)`: the largest `Σ_{u∈Γ} φ_α(u)` over self-avoiding paths `Γ`
/// with at most `l` edges, using exact weights.
pub fn max_path_alpha_weight(g: &Graph, alpha: f64, l: usize) -> Result<PathWeight> {
    let phi: Vec<f64> = alpha_weights(g, alpha, 0.0).iter().map(|w| w.value).collect();
    max_path_alpha_weight_with(g, &phi, l, DEFAULT_PATH_BUDGET)
}

/// Branch-and-bound search over self-avoiding paths given vertex weights.
///
/// A partial path is abandoned once its weight plus `remaining · max φ`
/// cannot exceed the incumbent. Fails with `BudgetExceeded` rather than
/// returning an approximation.
pub fn max_path_alpha_weight_with(
    g: &Graph,
    phi: &[f64],
    l: usize,
    budget: u64,
) -> Result<PathWeight> {
    let n = g.n();
    if n == 0 {
        return Ok(PathWeight {
            value: 0.0,
            path: Vec::new(),
            nodes: 0,
        });
    }
    let max_phi = phi.iter().cloned().fold(0.0, f64::max);
    let mut starts: Vec<usize> = (0..n).collect();
    starts.sort_by(|&a, &b| phi[b].total_cmp(&phi[a]).then(a.cmp(&b)));
    let mut best = PathWeight {
        value: phi[starts[0]],
        path: vec![starts[0]],
        nodes: 0,
    };
    let mut on_path = vec![false; n];
    let mut path = Vec::with_capacity(l + 1);
    // per-depth cursor into the adjacency list of the path's last vertex
    let mut cursor = Vec::with_capacity(l + 1);
    let mut nodes = 0u64;
    for &s in &starts {
        path.clear();
        cursor.clear();
        path.push(s);
        cursor.push(0usize);
        on_path[s] = true;
        let mut sum = phi[s];
        nodes += 1;
        while let Some(&last) = path.last() {
            let depth = path.len() - 1;
            let remaining = l - depth;
            let ci = cursor.len() - 1;
            let can_extend = remaining > 0 && sum + remaining as f64 * max_phi > best.value;
            let nbrs = g.neighbors(last);
            let mut advanced = false;
            if can_extend {
                while cursor[ci] < nbrs.len() {
                    let w = nbrs[cursor[ci]];
                    cursor[ci] += 1;
                    if on_path[w] {
                        continue;
                    }
                    nodes += 1;
                    if nodes > budget {
                        return Err(Error::BudgetExceeded {
                            what: "path enumeration nodes",
                            reached: nodes,
                            budget,
                        });
                    }
                    on_path[w] = true;
                    path.push(w);
                    cursor.push(0);
                    sum += phi[w];
                    if sum > best.value {
                        best.value = sum;
                        best.path = path.clone();
                    }
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                on_path[last] = false;
                sum -= phi[last];
                path.pop();
                cursor.pop();
            }
        }
    }
    best.nodes = nodes;
    Ok(best)
}
