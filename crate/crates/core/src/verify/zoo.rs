//! Built-in instance families for the verification suites.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::decomposition::{Block, BlockPartition};
use crate::graph::Graph;
use crate::model::SpinModel;
use crate::rng::{self, Rng};

/// A graph and model for the exact analyzer.
#[derive(Debug, Clone)]
pub struct ZooInstance {
    pub name: String,
    pub graph: Graph,
    pub model: SpinModel,
}

fn invariant(g: &Graph) -> (usize, usize, Vec<(usize, Vec<usize>)>) {
    let mut local: Vec<(usize, Vec<usize>)> = (0..g.n())
        .map(|v| {
            let mut nd: Vec<usize> = g.neighbors(v).iter().map(|&w| g.degree(w)).collect();
            nd.sort_unstable();
            (g.degree(v), nd)
        })
        .collect();
    local.sort();
    (g.n(), g.m(), local)
}

/// Whether `a` and `b` are isomorphic, by backtracking over
/// degree-preserving maps.
pub fn are_isomorphic(a: &Graph, b: &Graph) -> bool {
    if invariant(a) != invariant(b) {
        return false;
    }
    let n = a.n();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn extend(a: &Graph, b: &Graph, i: usize, map: &mut [usize], used: &mut [bool]) -> bool {
        if i == a.n() {
            return true;
        }
        for t in 0..b.n() {
            if used[t] || a.degree(i) != b.degree(t) {
                continue;
            }
            let consistent = (0..i).all(|j| a.has_edge(i, j) == b.has_edge(t, map[j]));
            if !consistent {
                continue;
            }
            map[i] = t;
            used[t] = true;
            if extend(a, b, i + 1, map, used) {
                return true;
            }
            used[t] = false;
        }
        map[i] = usize::MAX;
        false
    }
    extend(a, b, 0, &mut map, &mut used)
}

/// Keeps the first graph of every isomorphism class, preserving order.
pub fn dedupe_isomorphic(graphs: Vec<Graph>) -> Vec<Graph> {
    let mut out: Vec<Graph> = Vec::new();
    for g in graphs {
        if !out.iter().any(|h| are_isomorphic(h, &g)) {
            out.push(g);
        }
    }
    out
}

/// One representative of every connected graph on `1..=max_n` vertices,
/// ordered by vertex count, then edge count.
pub fn connected_graphs(max_n: usize) -> Vec<Graph> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        let mut found: Vec<Graph> = (0u64..1 << pairs.len())
            .map(|mask| {
                let edges: Vec<(usize, usize)> = pairs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &e)| e)
                    .collect();
                Graph::from_edges(n, &edges).expect("valid edge subset")
            })
            .filter(|g| g.components().len() == 1)
            .collect();
        found.sort_by_key(|g| g.m());
        out.extend(dedupe_isomorphic(found));
    }
    out
}

/// One representative of every `d`-regular graph on `n` vertices,
/// connected or not.
pub fn regular_graphs(n: usize, d: usize) -> Vec<Graph> {
    if n == 0 || d >= n || (n * d) % 2 == 1 {
        return Vec::new();
    }
    let mut labeled = Vec::new();
    let mut deg = vec![0usize; n];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    // relabelling makes N(0) = {1, …, d} without loss of generality
    for v in 1..=d {
        edges.push((0, v));
        deg[v] += 1;
    }
    deg[0] = d;
    fn fill(
        u: usize,
        n: usize,
        d: usize,
        deg: &mut [usize],
        edges: &mut Vec<(usize, usize)>,
        out: &mut Vec<Graph>,
    ) {
        if u == n {
            out.push(Graph::from_edges(n, edges).expect("regular graph"));
            return;
        }
        if deg[u] == d {
            fill(u + 1, n, d, deg, edges, out);
            return;
        }
        let need = d - deg[u];
        let cands: Vec<usize> = (u + 1..n).filter(|&w| deg[w] < d).collect();
        if cands.len() < need {
            return;
        }
        let mut pick: Vec<usize> = (0..need).collect();
        loop {
            for &i in &pick {
                edges.push((u, cands[i]));
                deg[cands[i]] += 1;
            }
            deg[u] = d;
            fill(u + 1, n, d, deg, edges, out);
            deg[u] = d - need;
            for &i in &pick {
                edges.pop();
                deg[cands[i]] -= 1;
            }
            // next combination in lexicographic order
            let mut k = need;
            while k > 0 && pick[k - 1] == cands.len() - need + k - 1 {
                k -= 1;
            }
            if k == 0 {
                return;
            }
            pick[k - 1] += 1;
            for j in k..need {
                pick[j] = pick[j - 1] + 1;
            }
        }
    }
    fill(1, n, d, &mut deg, &mut edges, &mut labeled);
    dedupe_isomorphic(labeled)
}

/// Every `(Δ, graph)` with `graph` Δ-regular on at most `max_n` vertices
/// and `Δ ≥ 1`.
pub fn regular_zoo(max_n: usize) -> Vec<(usize, Graph)> {
    let mut out = Vec::new();
    for n in 2..=max_n {
        for d in 1..n {
            out.extend(regular_graphs(n, d).into_iter().map(|g| (d, g)));
        }
    }
    out
}

/// Uniform labelled tree on `k` vertices via a Prüfer sequence.
pub fn random_tree(k: usize, rng: &mut Rng) -> Graph {
    if k <= 1 {
        return Graph::empty(k);
    }
    if k == 2 {
        return Graph::path(2);
    }
    let seq: Vec<usize> = (0..k - 2).map(|_| rng.random_range(0..k)).collect();
    let mut degree = vec![1usize; k];
    for &x in &seq {
        degree[x] += 1;
    }
    let mut edges = Vec::with_capacity(k - 1);
    for &x in &seq {
        let leaf = (0..k).find(|&v| degree[v] == 1).expect("a leaf exists");
        edges.push((leaf, x));
        degree[leaf] -= 1;
        degree[x] -= 1;
    }
    let rest: Vec<usize> = (0..k).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    Graph::from_edges(k, &edges).expect("Prüfer tree")
}

/// Soft model on `q` states with `h` and symmetric `g` entries drawn
/// uniformly from `[−norm, norm]`.
pub fn random_soft(q: usize, norm: f64, rng: &mut Rng) -> SpinModel {
    let h: Vec<f64> = (0..q).map(|_| rng.random_range(-norm..=norm)).collect();
    let mut g = vec![vec![0.0; q]; q];
    for x in 0..q {
        for y in x..q {
            let v = rng.random_range(-norm..=norm);
            g[x][y] = v;
            g[y][x] = v;
        }
    }
    SpinModel::soft(h, g).expect("finite symmetric model")
}

/// Coloring `q ∈ {3, 4}`, hardcore `β ∈ {0, 0.5, 1}` and one random soft
/// model with three states and `‖H‖ ≤ 0.5`.
pub fn model_family(rng: &mut Rng) -> Vec<(String, SpinModel)> {
    vec![
        ("coloring-q3".into(), SpinModel::coloring(3).unwrap()),
        ("coloring-q4".into(), SpinModel::coloring(4).unwrap()),
        ("hardcore-b0".into(), SpinModel::hardcore(0.0).unwrap()),
        ("hardcore-b0.5".into(), SpinModel::hardcore(0.5).unwrap()),
        ("hardcore-b1".into(), SpinModel::hardcore(1.0).unwrap()),
        ("soft-q3".into(), random_soft(3, 0.5, rng)),
    ]
}

fn graph_name(g: &Graph) -> String {
    let edges: Vec<String> = g.edges().map(|(u, v)| format!("{u}{v}")).collect();
    format!("n{}[{}]", g.n(), edges.join(","))
}

/// Every connected graph on at most `max_n` vertices crossed with
/// [`model_family`].
pub fn exact_zoo(max_n: usize, seed: u64) -> Vec<ZooInstance> {
    let mut r = rng::seeded(seed);
    let mut out = Vec::new();
    for g in connected_graphs(max_n) {
        let name = graph_name(&g);
        for (label, model) in model_family(&mut r) {
            out.push(ZooInstance {
                name: format!("{name}/{label}"),
                graph: g.clone(),
                model,
            });
        }
    }
    out
}

/// Decay instance: a tree `T` on the first `k` vertices plus outside
/// vertices, each joined to one or two vertices of `T`.
#[derive(Debug, Clone)]
pub struct DecayInstance {
    pub graph: Graph,
    pub tree: Vec<usize>,
}

/// Random tree on at most `max_tree` vertices with up to `max_boundary`
/// outside vertices, redrawn until `ψ_λ ≤ 1` on the whole tree.
pub fn decay_instance(max_tree: usize, max_boundary: usize, lambda: f64, rng: &mut Rng) -> DecayInstance {
    loop {
        let k = rng.random_range(1..=max_tree);
        let t = random_tree(k, rng);
        let b = rng.random_range(0..=max_boundary);
        let mut edges: Vec<(usize, usize)> = t.edges().collect();
        for i in 0..b {
            let w = k + i;
            let mut tv: Vec<usize> = (0..k).collect();
            tv.shuffle(rng);
            let links = if k >= 2 { rng.random_range(1..=2) } else { 1 };
            for &u in &tv[..links] {
                edges.push((u, w));
            }
        }
        let graph = Graph::from_edges(k + b, &edges).expect("decay instance");
        let tree: Vec<usize> = (0..k).collect();
        let set = crate::graph::VertexSet::new(tree.clone());
        let ok = tree.iter().all(|&v| {
            crate::exact::psi_weight(&graph, &set, v, lambda).is_ok_and(|p| p <= 1.0)
        });
        if ok {
            return DecayInstance { graph, tree };
        }
    }
}

/// A small graph, model and disjoint block partition.
#[derive(Debug, Clone)]
pub struct PartitionedInstance {
    pub name: String,
    pub graph: Graph,
    pub model: SpinModel,
    pub partition: BlockPartition,
}

/// Ten partitioned instances for the block composition inequality.
pub fn partition_zoo() -> Vec<PartitionedInstance> {
    let gen = |v: &[usize]| Block::general(v.to_vec());
    let tree = |v: &[usize]| Block::tree(v.to_vec());
    let soft = SpinModel::soft(
        vec![0.2, -0.1, 0.0],
        vec![vec![0.4, -0.3, 0.1], vec![-0.3, 0.2, 0.0], vec![0.1, 0.0, -0.2]],
    )
    .unwrap();
    let mut out = Vec::new();
    let mut add = |name: &str, graph: Graph, model: SpinModel, blocks: Vec<Block>| {
        out.push(PartitionedInstance {
            name: name.into(),
            graph,
            model,
            partition: BlockPartition::new(blocks, None),
        });
    };
    let c3 = || SpinModel::coloring(3).unwrap();
    let c4 = || SpinModel::coloring(4).unwrap();
    let hc = |b: f64| SpinModel::hardcore(b).unwrap();
    add("path3-q3-a|bc", Graph::path(3), c3(), vec![gen(&[0]), tree(&[1, 2])]);
    add("path4-q3-ab|cd", Graph::path(4), c3(), vec![tree(&[0, 1]), tree(&[2, 3])]);
    add("cycle4-q3-halves", Graph::cycle(4), c3(), vec![tree(&[0, 1]), tree(&[2, 3])]);
    add("cycle5-q4-split", Graph::cycle(5), c4(), vec![tree(&[0, 1, 2]), tree(&[3, 4])]);
    add("star3-q4-center", Graph::star(3), c4(), vec![gen(&[0]), gen(&[1, 2, 3])]);
    add("path5-hardcore-1", Graph::path(5), hc(1.0), vec![tree(&[0, 1]), gen(&[2]), tree(&[3, 4])]);
    add("cycle4-hardcore-0.5", Graph::cycle(4), hc(0.5), vec![gen(&[0, 2]), gen(&[1, 3])]);
    add("k4-hardcore-0", Graph::complete(4), hc(0.0), vec![gen(&[0, 1]), gen(&[2, 3])]);
    add("path4-soft", Graph::path(4), soft.clone(), vec![tree(&[0, 1]), tree(&[2, 3])]);
    add(
        "triangle-tail-soft",
        Graph::from_edges(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap(),
        soft,
        vec![gen(&[0, 1, 2]), gen(&[3])],
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn connected_graph_counts() {
        // OEIS A001349
        let counts: Vec<usize> = (1..=5)
            .map(|n| connected_graphs(5).iter().filter(|g| g.n() == n).count())
            .collect();
        assert_eq!(counts, vec![1, 1, 2, 6, 21]);
    }

    #[test]
    fn regular_graph_counts() {
        // 2-regular: unions of cycles; 3-regular on 8 vertices: 5 connected
        // plus two copies of K4
        assert_eq!(regular_graphs(6, 2).len(), 2);
        assert_eq!(regular_graphs(8, 2).len(), 3);
        assert_eq!(regular_graphs(8, 3).len(), 6);
        assert_eq!(regular_graphs(6, 3).len(), 2);
        assert_eq!(regular_graphs(5, 3).len(), 0);
        assert_eq!(regular_graphs(8, 7).len(), 1);
        for (d, g) in regular_zoo(8) {
            assert!((0..g.n()).all(|v| g.degree(v) == d));
        }
    }

    #[test]
    fn isomorphism() {
        let a = Graph::path(4);
        let b = Graph::from_edges(4, &[(2, 0), (0, 3), (3, 1)]).unwrap();
        assert!(are_isomorphic(&a, &b));
        assert!(!are_isomorphic(&a, &Graph::star(3)));
    }

    #[test]
    fn prufer_trees_are_trees() {
        let mut r = rng::seeded(3);
        for k in 1..15 {
            let t = random_tree(k, &mut r);
            assert_eq!(t.m() + 1, k.max(1));
            assert_eq!(t.components().len(), 1);
        }
    }

    #[test]
    fn decay_instances_respect_psi() {
        let mut r = rng::seeded(9);
        for _ in 0..20 {
            let inst = decay_instance(12, 6, 0.25, &mut r);
            assert!(inst.graph.is_forest(&inst.tree));
        }
    }

    #[test]
    fn partitions_cover() {
        for inst in partition_zoo() {
            let mut seen = vec![0; inst.graph.n()];
            for b in &inst.partition.blocks {
                for &v in &b.vertices {
                    seen[v] += 1;
                }
            }
            assert!(seen.iter().all(|&c| c == 1), "{}", inst.name);
        }
    }
}
