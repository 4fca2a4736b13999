//! Undirected simple graphs and the structural quantities built on them.
//!
//! Vertices are indices `0..n`. Adjacency lists are kept sorted, so edge
//! iteration, file output and every derived quantity are deterministic.
//!
//! Conventions used throughout the crate:
//!
//! - A path of length `k` has `k` edges and `k + 1` vertices.
//! - Radii of the form `a log n` are rounded up, `⌈a log n⌉`, with the log
//!   base selected by [`LogBase`] (natural log unless configured).
//! - Distances are breadth-first edge counts; unreachable vertices are at
//!   distance infinity and contribute nothing to α-weights.

mod hypothesis;
mod io;
mod weights;

use std::collections::VecDeque;

use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::{rng, Error, Result};

pub use hypothesis::{
    check_hypothesis, expansion_probe, ExpansionReport, HypothesisParams, HypothesisReport,
};
pub use io::{parse_edge_list, read_edge_list, write_edge_list};
pub use weights::{
    alpha_weight, alpha_weights, max_path_alpha_weight, max_path_alpha_weight_with, AlphaWeight,
    PathWeight, DEFAULT_PATH_BUDGET,
};

/// Sentinel distance for unreachable vertices.
pub const UNREACHABLE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    E,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "10")]
    Ten,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::E => x.ln(),
            LogBase::Two => x.log2(),
            LogBase::Ten => x.log10(),
        }
    }

    /// `⌈coef · log n⌉`, clamped at zero.
    pub fn radius(self, coef: f64, n: usize) -> usize {
        let r = (coef * self.log(n.max(1) as f64)).ceil();
        if r > 0.0 {
            r as usize
        } else {
            0
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e" | "ln" => Ok(LogBase::E),
            "2" => Ok(LogBase::Two),
            "10" => Ok(LogBase::Ten),
            other => Err(Error::invalid(format!("unknown log base {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    m: usize,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
            m: 0,
        }
    }

    /// Builds a graph from an edge list, rejecting self-loops, parallel edges
    /// and out-of-range endpoints.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!("edge ({u},{v}) out of range for n={n}")));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::invalid(format!("parallel edge ({u},{})", w[0])));
            }
        }
        Ok(Self { adj, m: edges.len() })
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges).unwrap()
    }

    pub fn cycle(n: usize) -> Self {
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        if n >= 3 {
            edges.push((0, n - 1));
        }
        Self::from_edges(n, &edges).unwrap()
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Self::from_edges(n, &edges).unwrap()
    }

    /// Star `K_{1,k}` with center 0.
    pub fn star(k: usize) -> Self {
        let edges: Vec<_> = (1..=k).map(|i| (0, i)).collect();
        Self::from_edges(k + 1, &edges).unwrap()
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, l)| l.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        self.multi_source_distances(&[source])
    }

    pub fn multi_source_distances(&self, sources: &[usize]) -> Vec<usize> {
        let mut dist = vec![UNREACHABLE; self.n()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s] != 0 {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if dist[w] == UNREACHABLE {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Distances from `sources` using only vertices with `allowed[v]`.
    pub fn restricted_distances(&self, sources: &[usize], allowed: &[bool]) -> Vec<usize> {
        let mut dist = vec![UNREACHABLE; self.n()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if allowed[s] && dist[s] != 0 {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if allowed[w] && dist[w] == UNREACHABLE {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Connected components of the subgraph induced by `allowed`, each sorted,
    /// listed by smallest vertex.
    pub fn components_within(&self, allowed: &[bool]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n()];
        let mut out = Vec::new();
        for s in 0..self.n() {
            if !allowed[s] || seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut i = 0;
            while i < comp.len() {
                let u = comp[i];
                i += 1;
                for &w in &self.adj[u] {
                    if allowed[w] && !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn components(&self) -> Vec<Vec<usize>> {
        self.components_within(&vec![true; self.n()])
    }

    /// Number of edges with both endpoints in `set`.
    pub fn induced_edge_count(&self, set: &[usize]) -> usize {
        let mask = self.mask(set);
        set.iter()
            .map(|&u| self.adj[u].iter().filter(|&&w| w > u && mask[w]).count())
            .sum()
    }

    pub fn mask(&self, set: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.n()];
        for &v in set {
            mask[v] = true;
        }
        mask
    }

    /// Whether `set` induces a forest.
    pub fn is_forest(&self, set: &[usize]) -> bool {
        let mask = self.mask(set);
        let comps = self.components_within(&mask).len();
        self.induced_edge_count(set) + comps == set.len()
    }
}

/// Ordered set of vertex indices without duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new(mut vertices: Vec<usize>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        Self(vertices)
    }

    /// Like [`VertexSet::new`] but rejects duplicates and indices `>= n`.
    pub fn checked(vertices: Vec<usize>, n: usize) -> Result<Self> {
        let len = vertices.len();
        let set = Self::new(vertices);
        if set.len() != len {
            return Err(Error::invalid("duplicate vertex in set"));
        }
        if let Some(&v) = set.0.last() {
            if v >= n {
                return Err(Error::invalid(format!("vertex {v} out of range for n={n}")));
            }
        }
        Ok(set)
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.iter().filter(|&v| !other.contains(v)).collect())
    }
}

impl From<Vec<usize>> for VertexSet {
    fn from(v: Vec<usize>) -> Self {
        Self::new(v)
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// G(n, p) with `p = d / n`: every unordered pair independently.
///
/// Pairs are visited in lexicographic order and the gaps between successive
/// included pairs are drawn from a geometric law, which has the same
/// distribution as one Bernoulli trial per pair at O(n + m) cost.
pub fn generate_er(n: usize, d: f64, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if !(d >= 0.0 && d <= n as f64) {
        return Err(Error::invalid(format!("mean degree {d} outside [0, n]")));
    }
    let p = d / n as f64;
    let mut edges = Vec::new();
    if p >= 1.0 {
        return Ok(Graph::complete(n));
    }
    if p > 0.0 && n >= 2 {
        let mut rng = rng::seeded(seed);
        let geo = Geometric::new(p).map_err(|e| Error::invalid(e.to_string()))?;
        let (mut u, mut v) = (0usize, 0usize);
        loop {
            // candidate is (u, v+1+skip) within row u
            let skip = geo.sample(&mut rng);
            let mut next = v as u64 + 1 + skip;
            while next >= n as u64 {
                u += 1;
                if u + 1 >= n {
                    break;
                }
                next = next - n as u64 + u as u64 + 1;
            }
            if u + 1 >= n {
                break;
            }
            v = next as usize;
            edges.push((u, v));
        }
    }
    Graph::from_edges(n, &edges)
}

/// `V(v, l)` and the edges of the induced subgraph `B(v, l)`.
pub fn ball(g: &Graph, v: usize, l: usize) -> (VertexSet, Vec<(usize, usize)>) {
    let (verts, edges) = ball_raw(g, v, l);
    (VertexSet::new(verts), edges)
}

fn ball_raw(g: &Graph, v: usize, l: usize) -> (Vec<usize>, Vec<(usize, usize)>) {
    let mut dist = std::collections::HashMap::new();
    dist.insert(v, 0usize);
    let mut order = vec![v];
    let mut i = 0;
    while i < order.len() {
        let u = order[i];
        i += 1;
        let du = dist[&u];
        if du == l {
            continue;
        }
        for &w in g.neighbors(u) {
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(w) {
                e.insert(du + 1);
                order.push(w);
            }
        }
    }
    let mut edges = Vec::new();
    for &u in &order {
        for &w in g.neighbors(u) {
            if u < w && dist.contains_key(&w) {
                edges.push((u, w));
            }
        }
    }
    edges.sort_unstable();
    (order, edges)
}

/// `|E(v,l)| − |V(v,l)| + 1`; zero iff the ball is a tree.
pub fn tree_excess(g: &Graph, v: usize, l: usize) -> i64 {
    let (verts, edges) = ball_raw(g, v, l);
    edges.len() as i64 - verts.len() as i64 + 1
}

/// Interior boundary `∂U` and exterior boundary `∂⁺U`.
pub fn boundaries(g: &Graph, u: &VertexSet) -> (VertexSet, VertexSet) {
    let mask = g.mask(u.as_slice());
    let mut interior = Vec::new();
    let mut exterior = Vec::new();
    for v in u.iter() {
        let mut inner = false;
        for &w in g.neighbors(v) {
            if !mask[w] {
                inner = true;
                exterior.push(w);
            }
        }
        if inner {
            interior.push(v);
        }
    }
    (VertexSet::new(interior), VertexSet::new(exterior))
}

/// `∂⁺_W U`: vertices outside `w` adjacent to `u`.
pub fn relative_exterior(g: &Graph, u: &VertexSet, w: &VertexSet) -> VertexSet {
    u.iter()
        .flat_map(|v| g.neighbors(v).iter().copied())
        .filter(|&x| !w.contains(x))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generate_er_trivial_densities() {
        let g = generate_er(5, 0.0, 7).unwrap();
        assert_eq!(g.m(), 0);
        let k4 = generate_er(4, 4.0, 123).unwrap();
        assert_eq!(k4.m(), 6);
        assert!(generate_er(5, -0.1, 1).is_err());
        assert!(generate_er(5, 5.5, 1).is_err());
    }

    #[test]
    fn generate_er_edge_count_within_four_sd() {
        // Binomial(n(n-1)/2, d/n): mean = n·d/2·(1−1/n), var = mean·(1−d/n)
        let (n, d) = (10_000usize, 2.0);
        let pairs = (n * (n - 1) / 2) as f64;
        let p = d / n as f64;
        let mean = pairs * p;
        let sd = (pairs * p * (1.0 - p)).sqrt();
        assert!((mean - 9999.0).abs() < 1e-9);
        let g = generate_er(n, d, 1).unwrap();
        assert!(((g.m() as f64) - mean).abs() < 4.0 * sd);
        assert_eq!(g.m(), generate_er(n, d, 1).unwrap().m());
    }

    #[test]
    fn generate_er_pair_frequencies_are_uniform() {
        // every pair of a 6-vertex graph should appear with frequency p
        let n = 6;
        let trials = 20_000;
        let mut counts = vec![0usize; n * n];
        for s in 0..trials {
            let g = generate_er(n, 2.0, s).unwrap();
            for (u, v) in g.edges() {
                counts[u * n + v] += 1;
            }
        }
        let p = 2.0 / n as f64;
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        for u in 0..n {
            for v in u + 1..n {
                let c = counts[u * n + v] as f64;
                assert!((c - trials as f64 * p).abs() < 5.0 * sd, "pair ({u},{v}) count {c}");
            }
        }
    }

    #[test]
    fn ball_examples() {
        let p = Graph::path(3);
        let (vs, es) = ball(&p, 1, 1);
        assert_eq!(vs.as_slice(), &[0, 1, 2]);
        assert_eq!(es, vec![(0, 1), (1, 2)]);
        let (vs, es) = ball(&p, 2, 0);
        assert_eq!(vs.as_slice(), &[2]);
        assert!(es.is_empty());
        let t = Graph::complete(3);
        let (vs, es) = ball(&t, 0, 2);
        assert_eq!(vs.len(), 3);
        assert_eq!(es.len(), 3);
    }

    #[test]
    fn tree_excess_examples() {
        assert_eq!(tree_excess(&Graph::star(5), 0, 3), 0);
        assert_eq!(tree_excess(&Graph::complete(3), 1, 1), 1);
        assert_eq!(tree_excess(&Graph::complete(4), 2, 1), 3);
    }

    #[test]
    fn boundary_examples() {
        let p = Graph::path(3);
        let all = VertexSet::new(vec![0, 1, 2]);
        let (i, e) = boundaries(&p, &all);
        assert!(i.is_empty() && e.is_empty());
        let (i, e) = boundaries(&p, &VertexSet::new(vec![0]));
        assert_eq!(i.as_slice(), &[0]);
        assert_eq!(e.as_slice(), &[1]);
        let u = VertexSet::new(vec![0, 1]);
        assert_eq!(relative_exterior(&p, &u, &u).as_slice(), &[2]);
    }

    #[test]
    fn from_edges_rejects_bad_input() {
        assert!(Graph::from_edges(3, &[(0, 0)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 3)]).is_err());
    }

    #[test]
    fn vertex_set_checked() {
        assert!(VertexSet::checked(vec![1, 1], 3).is_err());
        assert!(VertexSet::checked(vec![3], 3).is_err());
        assert_eq!(VertexSet::checked(vec![2, 0], 3).unwrap().as_slice(), &[0, 2]);
    }

    #[test]
    fn radius_uses_ceiling() {
        assert_eq!(LogBase::E.radius(1.0, 1000), 7);
        assert_eq!(LogBase::Two.radius(1.0, 1024), 10);
        assert_eq!(LogBase::E.radius(0.5, 1), 0);
    }
}
