use std::collections::{HashMap, VecDeque};

use serde_json::json;

use super::skeleton::distances_to;
use super::{
    extended_classes, Block, BlockKind, BlockPartition, GoodBadLabeling, PartitionParams, Piece,
    Skeleton, SkeletonParams,
};
use crate::graph::{boundaries, Graph, VertexSet, UNREACHABLE};
use crate::report::CheckRecord;
use crate::{Error, Result};

/// Names of the structural checks in the order [`validate_partition`]
/// reports them.
pub const PARTITION_CHECKS: [&str; 6] = [
    "disjoint_cover",
    "single_edge_between_blocks",
    "good_boundary",
    "diameter",
    "skeleton_structure",
    "skeleton_separation",
];

/// Assembles blocks around each skeleton component and turns the remaining
/// classes into tree or singleton blocks.
pub fn build_blocks(
    g: &Graph,
    labeling: &GoodBadLabeling,
    skeleton: &Skeleton,
    params: &SkeletonParams,
) -> Result<BlockPartition> {
    let n = g.n();
    let class = extended_classes(g, labeling)?;
    let radius = params.scale(n).ceil().max(0.0) as usize;
    let class_count = class.iter().copied().max().map_or(0, |c| c + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); class_count];
    for v in 0..n {
        members[class[v]].push(v);
    }

    let mut owner = vec![usize::MAX; n];
    let mut blocks = Vec::new();
    for w_j in &skeleton.components {
        let dist = distances_to(g, w_j);
        let mut classes: Vec<usize> = (0..n)
            .filter(|&u| dist[u] <= radius)
            .map(|u| class[u])
            .collect();
        classes.sort_unstable();
        classes.dedup();
        let mut v_j: Vec<usize> = classes.iter().flat_map(|&c| members[c].iter().copied()).collect();
        v_j.sort_unstable();
        let j = blocks.len();
        for &v in &v_j {
            if owner[v] != usize::MAX {
                return Err(Error::HypothesisViolated(format!(
                    "blocks around skeleton components overlap at vertex {v}"
                )));
            }
            owner[v] = j;
        }
        let pieces = attach_pieces(g, w_j, &v_j)?;
        blocks.push(Block {
            kind: BlockKind::Skeleton,
            vertices: v_j,
            skeleton: Some(w_j.clone()),
            pieces: Some(pieces),
        });
    }

    for c in 0..class_count {
        let vs = &members[c];
        if vs.is_empty() || owner[vs[0]] != usize::MAX {
            continue;
        }
        if !g.is_forest(vs) {
            return Err(Error::HypothesisViolated(format!(
                "class of vertex {} lies outside every skeleton block but contains a cycle",
                vs[0]
            )));
        }
        blocks.push(Block::tree(vs.clone()));
    }
    blocks.sort_by_key(|b| b.vertices[0]);

    Ok(BlockPartition::new(
        blocks,
        Some(PartitionParams {
            l_block: params.l_block,
            t: params.t,
            log_base: params.log_base,
            c: labeling.c,
            alpha: labeling.alpha,
            eps: labeling.eps,
        }),
    ))
}

/// Splits `V_j` into trees `U_i` hanging off the skeleton vertices.
fn attach_pieces(g: &Graph, w_j: &[usize], v_j: &[usize]) -> Result<Vec<Piece>> {
    let in_v = g.mask(v_j);
    let in_w = g.mask(w_j);
    let mut root = HashMap::new();
    let mut parent = HashMap::new();
    let mut queue = VecDeque::new();
    for &w in w_j {
        root.insert(w, w);
        queue.push_back(w);
    }
    while let Some(u) = queue.pop_front() {
        for &x in g.neighbors(u) {
            if !in_v[x] || in_w[x] {
                continue;
            }
            match root.get(&x) {
                None => {
                    root.insert(x, root[&u]);
                    parent.insert(x, u);
                    queue.push_back(x);
                }
                Some(_) => {
                    if parent.get(&u) != Some(&x) && parent.get(&x) != Some(&u) {
                        return Err(Error::NonUniqueAttachment { vertex: x });
                    }
                }
            }
        }
    }
    if let Some(&v) = v_j.iter().find(|v| !root.contains_key(*v)) {
        return Err(Error::NonUniqueAttachment { vertex: v });
    }
    let mut pieces: Vec<Piece> = w_j
        .iter()
        .map(|&w| Piece {
            root: w,
            vertices: Vec::new(),
        })
        .collect();
    let index: HashMap<usize, usize> = w_j.iter().enumerate().map(|(i, &w)| (w, i)).collect();
    for &v in v_j {
        pieces[index[&root[&v]]].vertices.push(v);
    }
    Ok(pieces)
}

/// Runs the six structural checks and returns one record per check, each
/// carrying the first failing witness when it fails.
pub fn validate_partition(
    g: &Graph,
    partition: &BlockPartition,
    labeling: &GoodBadLabeling,
) -> Vec<CheckRecord> {
    let n = g.n();
    let params = partition.params.unwrap_or(PartitionParams {
        l_block: 0.0,
        t: 0,
        log_base: Default::default(),
        c: labeling.c,
        alpha: labeling.alpha,
        eps: labeling.eps,
    });
    let scale = params.l_block * params.log_base.log(n.max(1) as f64);
    let t = params.t as f64;
    let mut out = Vec::with_capacity(6);

    // (1) disjoint cover
    let mut count = vec![0usize; n];
    let mut out_of_range = None;
    for b in &partition.blocks {
        for &v in &b.vertices {
            if v < n {
                count[v] += 1;
            } else {
                out_of_range = Some(v);
            }
        }
    }
    let bad = (0..n).find(|&v| count[v] != 1).or(out_of_range);
    let mut rec = CheckRecord::new(PARTITION_CHECKS[0], bad.is_none(), bad.map_or(0.0, |v| count.get(v).copied().unwrap_or(0) as f64), 1.0);
    if let Some(v) = bad {
        rec = rec.with_witness(json!({ "vertex": v }));
    }
    let covered = bad.is_none();
    out.push(rec);
    if !covered {
        // ownership is ill-defined; the remaining checks are reported failed
        for name in &PARTITION_CHECKS[1..] {
            out.push(CheckRecord::new(*name, false, f64::NAN, f64::NAN).with_witness(json!("partition does not cover")));
        }
        return out;
    }
    let owner = block_owner(partition, n);

    // (2) at most one edge between two blocks
    let mut between: HashMap<(usize, usize), usize> = HashMap::new();
    for (u, v) in g.edges() {
        let (a, b) = (owner[u], owner[v]);
        if a != b {
            *between.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let worst = between.iter().max_by_key(|(k, &c)| (c, std::cmp::Reverse(**k)));
    let max_edges = worst.map_or(0, |(_, &c)| c);
    let mut rec = CheckRecord::new(PARTITION_CHECKS[1], max_edges <= 1, max_edges as f64, 1.0);
    if max_edges > 1 {
        let (&(a, b), _) = worst.unwrap();
        rec = rec.with_witness(json!({ "blocks": [a, b] }));
    }
    out.push(rec);

    // (3) interior boundary vertices are good
    let mut bad_boundary = None;
    for (j, b) in partition.blocks.iter().enumerate() {
        let (interior, _) = boundaries(g, &VertexSet::new(b.vertices.clone()));
        let found = interior.iter().find(|&v| !labeling.good[v]);
        if let Some(v) = found {
            bad_boundary = Some((j, v));
            break;
        }
    }
    let mut rec = CheckRecord::new(PARTITION_CHECKS[2], bad_boundary.is_none(), bad_boundary.is_some() as u8 as f64, 0.0);
    if let Some((j, v)) = bad_boundary {
        rec = rec.with_witness(json!({ "block": j, "vertex": v }));
    }
    out.push(rec);

    // (4) diameter
    let diam_bound = (20.0 * t + 2.0) * scale;
    let mut worst_diam = (0usize, 0usize);
    for (j, b) in partition.blocks.iter().enumerate() {
        let d = induced_diameter(g, &b.vertices);
        if d > worst_diam.0 || (j == 0 && d == worst_diam.0) {
            worst_diam = (d, j);
        }
    }
    let diam_value = if worst_diam.0 == UNREACHABLE { f64::INFINITY } else { worst_diam.0 as f64 };
    let mut rec = CheckRecord::new(PARTITION_CHECKS[3], diam_value < diam_bound || partition.blocks.iter().all(|b| b.vertices.len() == 1), diam_value, diam_bound);
    if !rec.pass {
        rec = rec.with_witness(json!({ "block": worst_diam.1 }));
    }
    out.push(rec);

    // (5) skeleton block structure
    out.push(check_skeleton_blocks(g, partition, scale, t));

    // (6) separation between skeleton components
    let skeletons: Vec<&Vec<usize>> = partition
        .blocks
        .iter()
        .filter_map(|b| b.skeleton.as_ref())
        .collect();
    let mut min_sep = f64::INFINITY;
    let mut sep_witness = None;
    for (i, w) in skeletons.iter().enumerate() {
        let dist = g.multi_source_distances(w);
        for (k, other) in skeletons.iter().enumerate().skip(i + 1) {
            let d = other.iter().map(|&v| dist[v]).min().unwrap_or(UNREACHABLE);
            let d = if d == UNREACHABLE { f64::INFINITY } else { d as f64 };
            if d < min_sep {
                min_sep = d;
                sep_witness = Some((i, k));
            }
        }
    }
    let sep_bound = 5.0 * scale;
    let mut rec = CheckRecord::new(PARTITION_CHECKS[5], min_sep >= sep_bound, min_sep, sep_bound);
    if !rec.pass {
        rec = rec.with_witness(json!({ "skeletons": sep_witness }));
    }
    out.push(rec);
    out
}

fn block_owner(partition: &BlockPartition, n: usize) -> Vec<usize> {
    let mut o = vec![usize::MAX; n];
    for (j, b) in partition.blocks.iter().enumerate() {
        for &v in &b.vertices {
            o[v] = j;
        }
    }
    o
}

/// Diameter of the subgraph induced by `set`; `UNREACHABLE` if disconnected.
fn induced_diameter(g: &Graph, set: &[usize]) -> usize {
    if set.len() <= 1 {
        return 0;
    }
    let mask = g.mask(set);
    let forest = g.is_forest(set);
    let ecc = |s: usize| {
        let d = g.restricted_distances(&[s], &mask);
        set.iter()
            .map(|&v| d[v])
            .enumerate()
            .max_by_key(|&(_, x)| x)
            .map(|(i, x)| (set[i], x))
            .unwrap()
    };
    if forest {
        let (far, d) = ecc(set[0]);
        if d == UNREACHABLE {
            return UNREACHABLE;
        }
        return ecc(far).1;
    }
    set.iter().map(|&s| ecc(s).1).max().unwrap_or(0)
}

fn check_skeleton_blocks(g: &Graph, partition: &BlockPartition, scale: f64, t: f64) -> CheckRecord {
    let name = PARTITION_CHECKS[4];
    let mut worst_value = 0.0f64;
    for (j, b) in partition.blocks.iter().enumerate() {
        if b.kind != BlockKind::Skeleton {
            continue;
        }
        let fail = |what: &str, value: f64, bound: f64| {
            CheckRecord::new(name, false, value, bound).with_witness(json!({ "block": j, "violation": what }))
        };
        let (Some(w), Some(pieces)) = (&b.skeleton, &b.pieces) else {
            return fail("missing skeleton or pieces", f64::NAN, f64::NAN);
        };
        let in_block = g.mask(&b.vertices);
        let size_bound = 20.0 * t * scale;
        if w.len() as f64 > size_bound {
            return fail("skeleton size", w.len() as f64, size_bound);
        }
        let in_w = g.mask(w);
        let max_deg = w
            .iter()
            .map(|&v| g.neighbors(v).iter().filter(|&&x| in_w[x]).count())
            .max()
            .unwrap_or(0);
        if max_deg as f64 > 2.0 * t {
            return fail("skeleton degree", max_deg as f64, 2.0 * t);
        }
        let mut piece_roots: Vec<usize> = pieces.iter().map(|p| p.root).collect();
        piece_roots.sort_unstable();
        if piece_roots != *w {
            return fail("piece roots differ from skeleton", f64::NAN, f64::NAN);
        }
        let depth_bound = 2.0 * scale;
        for p in pieces {
            let in_piece = g.mask(&p.vertices);
            if !in_piece[p.root] || !g.is_forest(&p.vertices) {
                return fail("piece is not a tree containing its root", p.root as f64, f64::NAN);
            }
            let d = g.restricted_distances(&[p.root], &in_piece);
            let depth = p.vertices.iter().map(|&v| d[v]).max().unwrap_or(0);
            if depth == UNREACHABLE {
                return fail("piece is disconnected", p.root as f64, f64::NAN);
            }
            if depth as f64 > depth_bound {
                return fail("piece depth", depth as f64, depth_bound);
            }
            worst_value = worst_value.max(depth as f64 / depth_bound.max(f64::MIN_POSITIVE));
            for &u in &p.vertices {
                if u == p.root {
                    continue;
                }
                if let Some(&x) = g.neighbors(u).iter().find(|&&x| in_block[x] && !in_piece[x]) {
                    return fail("piece touches the rest of its block", (u * g.n() + x) as f64, f64::NAN)
                        .with_witness(json!({ "block": j, "violation": "piece edge", "edge": [u, x] }));
                }
            }
        }
        let (interior, _) = boundaries(g, &VertexSet::new(b.vertices.clone()));
        let dist = g.multi_source_distances(w);
        let near = interior.iter().map(|v| dist[v]).min().unwrap_or(UNREACHABLE);
        let near = if near == UNREACHABLE { f64::INFINITY } else { near as f64 };
        if near < scale {
            return fail("boundary close to skeleton", near, scale);
        }
    }
    CheckRecord::new(name, true, worst_value, 1.0)
}

#[cfg(test)]
mod tests {
    use super::super::{build_skeleton, classify, GoodBadLabeling, ScanOrder, SkeletonParams};
    use super::*;

    fn all_pass(r: &[CheckRecord]) -> bool {
        r.iter().all(|c| c.pass)
    }

    #[test]
    fn forest_partition_validates() {
        let g = Graph::from_edges(10, &[(0, 1), (1, 2), (2, 3), (3, 4), (5, 6), (6, 7), (6, 8)]).unwrap();
        let lab = classify(&g, 2.0, 0.5, 1.1, 0.0).unwrap();
        let p = SkeletonParams {
            check_path_cuts: false,
            ..SkeletonParams::new(0.5, 1)
        };
        let sk = build_skeleton(&g, &lab, &p).unwrap();
        assert!(sk.components.is_empty());
        let part = build_blocks(&g, &lab, &sk, &p).unwrap();
        assert!(part.blocks.iter().all(|b| matches!(b.kind, BlockKind::Tree | BlockKind::Singleton)));
        let report = validate_partition(&g, &part, &lab);
        assert_eq!(report.len(), 6);
        assert!(all_pass(&report), "{report:?}");
    }

    #[test]
    fn all_good_graph_gives_singletons() {
        let g = Graph::cycle(8);
        let lab = GoodBadLabeling::all_good(8);
        let p = SkeletonParams {
            check_path_cuts: false,
            ..SkeletonParams::new(0.1, 1)
        };
        let sk = build_skeleton(&g, &lab, &p).unwrap();
        let part = build_blocks(&g, &lab, &sk, &p).unwrap();
        assert_eq!(part.blocks.len(), 8);
        assert!(part.blocks.iter().all(|b| b.kind == BlockKind::Singleton));
    }

    #[test]
    fn corrupted_partition_fails_boundary_check() {
        // bad 1 inside block {0,1,2}; moving 2 out exposes 1 on the boundary
        let g = Graph::path(5);
        let mut lab = GoodBadLabeling::all_good(5);
        lab.good[1] = false;
        let p = SkeletonParams {
            check_path_cuts: false,
            ..SkeletonParams::new(0.5, 1)
        };
        let sk = build_skeleton(&g, &lab, &p).unwrap();
        let part = build_blocks(&g, &lab, &sk, &p).unwrap();
        assert!(all_pass(&validate_partition(&g, &part, &lab)));
        let mut blocks = part.blocks.clone();
        let j = blocks.iter().position(|b| b.vertices.contains(&1)).unwrap();
        blocks[j].vertices.retain(|&v| v != 2);
        blocks.push(Block::singleton(2));
        let corrupted = BlockPartition::new(blocks, part.params);
        let report = validate_partition(&g, &corrupted, &lab);
        let rec = report.iter().find(|r| r.check == "good_boundary").unwrap();
        assert!(!rec.pass);
        assert_eq!(rec.witness.as_ref().unwrap()["vertex"], 1);
    }

    /// triangle 0-1-2 with pendant paths of length 4 at each corner
    fn triangle_with_legs() -> Graph {
        let mut edges = vec![(0, 1), (1, 2), (0, 2)];
        let mut next = 3;
        for corner in 0..3 {
            let mut prev = corner;
            for _ in 0..4 {
                edges.push((prev, next));
                prev = next;
                next += 1;
            }
        }
        Graph::from_edges(next, &edges).unwrap()
    }

    #[test]
    fn triangle_with_pendant_trees_forms_one_skeleton_block() {
        let g = triangle_with_legs();
        let n = g.n();
        assert_eq!(n, 15);
        // bad vertices: the triangle; everything else good
        let mut lab = GoodBadLabeling::all_good(n);
        for v in 0..3 {
            lab.good[v] = false;
        }
        let p = SkeletonParams {
            check_path_cuts: false,
            order: ScanOrder::CheapFirst,
            ..SkeletonParams::new(0.5, 1)
        };
        // L ln 15 ≈ 1.35, so radius 2 around W
        let sk = build_skeleton(&g, &lab, &p).unwrap();
        assert_eq!(sk.components, vec![vec![0, 1, 2]]);
        let part = build_blocks(&g, &lab, &sk, &p).unwrap();
        let b = &part.blocks[0];
        assert_eq!(b.kind, BlockKind::Skeleton);
        // class of the triangle: corners plus their good neighbours 3, 7, 11;
        // vertices 4, 8, 12 are within distance 2 but form their own classes
        let radius = p.scale(n).ceil() as usize;
        assert_eq!(radius, 2);
        let dist = g.multi_source_distances(&[0, 1, 2]);
        let oracle: Vec<usize> = {
            let cls = extended_classes(&g, &lab).unwrap();
            let near: Vec<usize> = (0..n).filter(|&u| dist[u] <= radius).map(|u| cls[u]).collect();
            (0..n).filter(|&u| near.contains(&cls[u])).collect()
        };
        assert_eq!(b.vertices, oracle);
        assert_eq!(b.pieces.as_ref().unwrap().len(), 3);
        let report = validate_partition(&g, &part, &lab);
        let struct_rec = report.iter().find(|r| r.check == "skeleton_structure").unwrap();
        assert!(struct_rec.pass, "{struct_rec:?}");
    }

    #[test]
    fn two_cycles_in_one_class_is_non_unique_attachment() {
        // triangle 0-1-2 is the skeleton; square 3-4-5-6 hangs from 0 via 3,
        // so 5 is reachable from the skeleton by two routes
        let edges = [(0, 1), (1, 2), (0, 2), (0, 3), (3, 4), (4, 5), (5, 6), (6, 3)];
        let g = Graph::from_edges(7, &edges).unwrap();
        let mut lab = GoodBadLabeling::all_good(7);
        for v in 0..7 {
            lab.good[v] = false;
        }
        let members: Vec<bool> = (0..7).map(|v| v < 3).collect();
        let sk = Skeleton {
            members,
            components: vec![vec![0, 1, 2]],
        };
        let p = SkeletonParams {
            check_path_cuts: false,
            ..SkeletonParams::new(0.5, 1)
        };
        assert!(matches!(
            build_blocks(&g, &lab, &sk, &p),
            Err(Error::NonUniqueAttachment { .. })
        ));
    }

    #[test]
    fn induced_diameter_examples() {
        let g = Graph::path(6);
        assert_eq!(induced_diameter(&g, &[0, 1, 2, 3]), 3);
        assert_eq!(induced_diameter(&g, &[0, 2]), UNREACHABLE);
        let c = Graph::cycle(6);
        assert_eq!(induced_diameter(&c, &[0, 1, 2, 3, 4, 5]), 3);
    }
}
