//! Skeleton growth by three addition rules, applied until none fires:
//!
//! 1. a cycle `u₁…u_m` in `V − W` with `3 ≤ m < 5L log n` vertices;
//! 2. a path `u₁…u_m` in `V − W`, both ends adjacent to `W`,
//!    `2 ≤ m < 5L log n`;
//! 3. a vertex outside `W` with at least two neighbours in `W`.
//!
//! Each rule only becomes easier to satisfy as `W` grows, so the closure is
//! the same whatever order additions are made in.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::GoodBadLabeling;
use crate::graph::{Graph, LogBase, UNREACHABLE};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanOrder {
    /// rule 3, then 2, then 1; lowest vertex first
    #[default]
    CheapFirst,
    /// rule 1, then 2, then 3; highest vertex first
    CyclesFirstDescending,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkeletonParams {
    pub l_block: f64,
    pub t: u32,
    pub log_base: LogBase,
    pub order: ScanOrder,
    /// check that every path of `⌈L log n⌉` edges has two consecutive good
    /// vertices before building
    pub check_path_cuts: bool,
    pub path_budget: u64,
}

impl SkeletonParams {
    pub fn new(l_block: f64, t: u32) -> Self {
        Self {
            l_block,
            t,
            log_base: LogBase::E,
            order: ScanOrder::CheapFirst,
            check_path_cuts: true,
            path_budget: crate::graph::DEFAULT_PATH_BUDGET,
        }
    }

    /// `L log n` as a real number.
    pub fn scale(&self, n: usize) -> f64 {
        self.l_block * self.log_base.log(n.max(1) as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skeleton {
    pub members: Vec<bool>,
    /// connected components of `W`, sorted, ordered by smallest vertex
    pub components: Vec<Vec<usize>>,
}

impl Skeleton {
    pub fn vertices(&self) -> Vec<usize> {
        (0..self.members.len()).filter(|&v| self.members[v]).collect()
    }
}

/// A rule that can still fire, with the vertices it would add.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleApplication {
    pub rule: u8,
    pub vertices: Vec<usize>,
}

pub fn build_skeleton(
    g: &Graph,
    labeling: &GoodBadLabeling,
    params: &SkeletonParams,
) -> Result<Skeleton> {
    let n = g.n();
    let scale = params.scale(n);
    if params.check_path_cuts {
        let len = scale.ceil().max(0.0) as usize;
        if let Some(path) = path_cut_violation(g, labeling, len, params.path_budget)? {
            return Err(Error::HypothesisViolated(format!(
                "path {path:?} of {len} edges has no two consecutive good vertices"
            )));
        }
    }
    let limit = 5.0 * scale;
    let mut members = vec![false; n];
    while let Some(app) = find_rule_application(g, &members, limit, params.order) {
        for v in app.vertices {
            members[v] = true;
        }
    }
    let components = g.components_within(&members);
    let size_cap = 20.0 * params.t as f64 * scale;
    for comp in &components {
        let excess = g.induced_edge_count(comp) as i64 - comp.len() as i64 + 1;
        if comp.len() as f64 > size_cap || excess > params.t as i64 {
            return Err(Error::HypothesisViolated(format!(
                "skeleton component at vertex {} has {} vertices (cap {size_cap:.3}) and tree excess {excess} (cap {})",
                comp[0],
                comp.len(),
                params.t
            )));
        }
    }
    Ok(Skeleton {
        members,
        components,
    })
}

/// First applicable rule under `order`, or `None` at a fixed point.
/// `limit` is the strict upper bound `5L log n` on the vertex count `m`.
pub fn find_rule_application(
    g: &Graph,
    members: &[bool],
    limit: f64,
    order: ScanOrder,
) -> Option<RuleApplication> {
    let n = g.n();
    let verts: Vec<usize> = match order {
        ScanOrder::CheapFirst => (0..n).collect(),
        ScanOrder::CyclesFirstDescending => (0..n).rev().collect(),
    };
    let rules: [u8; 3] = match order {
        ScanOrder::CheapFirst => [3, 2, 1],
        ScanOrder::CyclesFirstDescending => [1, 2, 3],
    };
    for rule in rules {
        for &v in &verts {
            if members[v] {
                continue;
            }
            let found = match rule {
                3 => (g.neighbors(v).iter().filter(|&&w| members[w]).count() >= 2).then(|| vec![v]),
                2 => connecting_path(g, members, v, limit),
                _ => shortest_cycle_through(g, members, v, limit),
            };
            if let Some(vertices) = found {
                return Some(RuleApplication { rule, vertices });
            }
        }
    }
    None
}

fn touches(g: &Graph, members: &[bool], v: usize) -> bool {
    g.neighbors(v).iter().any(|&w| members[w])
}

/// Shortest path in `V − W` from `s` to another vertex adjacent to `W`,
/// if `s` is itself adjacent to `W` and the path has fewer than `limit`
/// vertices.
fn connecting_path(g: &Graph, members: &[bool], s: usize, limit: f64) -> Option<Vec<usize>> {
    if !touches(g, members, s) || limit <= 2.0 {
        return None;
    }
    // m vertices means m − 1 edges
    let max_edges = (limit - 1.0).ceil() as usize - 1;
    let mut parent = std::collections::HashMap::new();
    parent.insert(s, usize::MAX);
    let mut queue = VecDeque::from([(s, 0usize)]);
    while let Some((u, d)) = queue.pop_front() {
        if u != s && touches(g, members, u) {
            let mut path = vec![u];
            let mut x = u;
            while parent[&x] != usize::MAX {
                x = parent[&x];
                path.push(x);
            }
            path.reverse();
            return Some(path);
        }
        if d == max_edges {
            continue;
        }
        for &w in g.neighbors(u) {
            if !members[w] && !parent.contains_key(&w) {
                parent.insert(w, u);
                queue.push_back((w, d + 1));
            }
        }
    }
    None
}

/// Shortest cycle in `V − W` through `s` with fewer than `limit` vertices.
///
/// Breadth-first search from `s` labels every vertex with the child of `s`
/// it descends from; an edge between two different branches closes a cycle
/// through `s` of `d(x) + d(y) + 1` vertices, and the smallest such edge
/// gives the shortest cycle.
fn shortest_cycle_through(g: &Graph, members: &[bool], s: usize, limit: f64) -> Option<Vec<usize>> {
    if limit <= 3.0 {
        return None;
    }
    let max_len = (limit).ceil() as usize - 1;
    let max_depth = max_len / 2;
    let mut dist = std::collections::HashMap::new();
    let mut parent = std::collections::HashMap::new();
    let mut branch = std::collections::HashMap::new();
    dist.insert(s, 0usize);
    let mut order = vec![s];
    let mut i = 0;
    while i < order.len() {
        let u = order[i];
        i += 1;
        let du = dist[&u];
        if du == max_depth {
            continue;
        }
        for &w in g.neighbors(u) {
            if members[w] || dist.contains_key(&w) {
                continue;
            }
            dist.insert(w, du + 1);
            parent.insert(w, u);
            branch.insert(w, if u == s { w } else { branch[&u] });
            order.push(w);
        }
    }
    let mut best: Option<(usize, usize, usize)> = None;
    for &x in &order {
        if x == s {
            continue;
        }
        for &y in g.neighbors(x) {
            if y <= x || y == s || !dist.contains_key(&y) || branch[&x] == branch[&y] {
                continue;
            }
            let len = dist[&x] + dist[&y] + 1;
            if len <= max_len && best.is_none_or(|(b, _, _)| len < b) {
                best = Some((len, x, y));
            }
        }
    }
    let (_, x, y) = best?;
    let climb = |mut v: usize| {
        let mut p = vec![v];
        while v != s {
            v = parent[&v];
            p.push(v);
        }
        p
    };
    let mut cycle = climb(x);
    cycle.reverse();
    let mut back = climb(y);
    back.pop();
    cycle.extend(back);
    Some(cycle)
}

/// A self-avoiding path of `len` edges avoiding good–good edges, if one
/// exists. Such a path contradicts the path-cut condition.
pub fn path_cut_violation(
    g: &Graph,
    labeling: &GoodBadLabeling,
    len: usize,
    budget: u64,
) -> Result<Option<Vec<usize>>> {
    let n = g.n();
    if len == 0 {
        return Ok(if n > 0 { Some(vec![0]) } else { None });
    }
    let ok_edge = |u: usize, w: usize| !(labeling.good[u] && labeling.good[w]);
    let mut on_path = vec![false; n];
    let mut nodes = 0u64;
    for s in 0..n {
        if !g.neighbors(s).iter().any(|&w| ok_edge(s, w)) {
            continue;
        }
        let mut path = vec![s];
        let mut cursor = vec![0usize];
        on_path[s] = true;
        while let Some(&last) = path.last() {
            if path.len() == len + 1 {
                return Ok(Some(path));
            }
            let ci = cursor.len() - 1;
            let nbrs = g.neighbors(last);
            let mut advanced = false;
            while cursor[ci] < nbrs.len() {
                let w = nbrs[cursor[ci]];
                cursor[ci] += 1;
                if on_path[w] || !ok_edge(last, w) {
                    continue;
                }
                nodes += 1;
                if nodes > budget {
                    return Err(Error::BudgetExceeded {
                        what: "path-cut search nodes",
                        reached: nodes,
                        budget,
                    });
                }
                on_path[w] = true;
                path.push(w);
                cursor.push(0);
                advanced = true;
                break;
            }
            if !advanced {
                on_path[last] = false;
                path.pop();
                cursor.pop();
            }
        }
    }
    Ok(None)
}

/// Distance from every vertex to the nearest member of `set`.
pub(crate) fn distances_to(g: &Graph, set: &[usize]) -> Vec<usize> {
    if set.is_empty() {
        return vec![UNREACHABLE; g.n()];
    }
    g.multi_source_distances(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(l_block: f64, t: u32, order: ScanOrder) -> SkeletonParams {
        SkeletonParams {
            order,
            check_path_cuts: false,
            ..SkeletonParams::new(l_block, t)
        }
    }

    /// a path 0..len with a triangle hung at `at`
    fn tree_with_triangle(len: usize, at: usize) -> Graph {
        let mut edges: Vec<_> = (1..len).map(|i| (i - 1, i)).collect();
        edges.push((at, len));
        edges.push((at, len + 1));
        edges.push((len, len + 1));
        Graph::from_edges(len + 2, &edges).unwrap()
    }

    #[test]
    fn forest_has_empty_skeleton() {
        let g = Graph::path(30);
        let sk = build_skeleton(&g, &GoodBadLabeling::all_good(30), &params(1.0, 1, ScanOrder::CheapFirst))
            .unwrap();
        assert!(sk.components.is_empty());
    }

    #[test]
    fn single_triangle_becomes_skeleton() {
        let g = tree_with_triangle(40, 17);
        let n = g.n();
        let p = params(0.2, 1, ScanOrder::CheapFirst);
        assert!(5.0 * p.scale(n) > 3.0);
        let sk = build_skeleton(&g, &GoodBadLabeling::all_good(n), &p).unwrap();
        assert_eq!(sk.components, vec![vec![17, 40, 41]]);
    }

    #[test]
    fn two_triangles_joined_by_short_path() {
        // triangles {0,1,2} and {6,7,8} joined by 2-3-4-5-6
        let edges = [
            (0, 1),
            (1, 2),
            (0, 2),
            (2, 3),
            (3, 4),
            (4, 5),
            (5, 6),
            (6, 7),
            (7, 8),
            (6, 8),
        ];
        let g = Graph::from_edges(9, &edges).unwrap();
        // 5L ln 9 must exceed the 5 path vertices 2..6 minus the ends in W: m = 3
        let p = params(0.5, 2, ScanOrder::CheapFirst);
        let sk = build_skeleton(&g, &GoodBadLabeling::all_good(9), &p).unwrap();
        assert_eq!(sk.components, vec![(0..9).collect::<Vec<_>>()]);
        // exhaustive oracle: no rule applies at the end
        assert!(find_rule_application(&g, &sk.members, 5.0 * p.scale(9), ScanOrder::CheapFirst).is_none());
    }

    #[test]
    fn long_cycle_is_ignored() {
        let g = Graph::cycle(12);
        let p = params(0.3, 1, ScanOrder::CheapFirst);
        assert!(5.0 * p.scale(12) < 12.0);
        let sk = build_skeleton(&g, &GoodBadLabeling::all_good(12), &p).unwrap();
        assert!(sk.components.is_empty());
    }

    #[test]
    fn oversized_skeleton_is_a_hypothesis_violation() {
        let g = Graph::complete(5);
        let p = params(1.0, 1, ScanOrder::CheapFirst);
        assert!(matches!(
            build_skeleton(&g, &GoodBadLabeling::all_good(5), &p),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn path_cut_detects_bad_runs() {
        let g = Graph::path(6);
        let mut lab = GoodBadLabeling::all_good(6);
        assert!(path_cut_violation(&g, &lab, 2, 1000).unwrap().is_none());
        lab.good[2] = false;
        lab.good[3] = false;
        // 1-2-3-4 uses no good-good edge
        let p = path_cut_violation(&g, &lab, 3, 1000).unwrap().unwrap();
        assert_eq!(p.len(), 4);
        assert!(path_cut_violation(&g, &lab, 4, 1000).unwrap().is_none());
    }
}
