use super::*;
use crate::decomposition::{Block, BlockPartition};
use crate::graph::{Graph, VertexSet};
use crate::model::SpinModel;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn single_vertex_q2() -> (SpinModel, Graph) {
    (SpinModel::coloring(2).unwrap(), Graph::empty(1))
}

#[test]
fn enumeration_order_is_lexicographic() {
    let m = SpinModel::hardcore(0.0).unwrap();
    let g = Graph::path(2);
    let c = enumerate(&m, &g, 100).unwrap();
    assert_eq!(c.states, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
    let c = enumerate(&SpinModel::coloring(3).unwrap(), &Graph::complete(3), 100).unwrap();
    assert_eq!(c.len(), 6);
    assert_eq!(c.states[0], vec![0, 1, 2]);
    assert_eq!(c.states[5], vec![2, 1, 0]);
}

#[test]
fn enumeration_budget() {
    let m = SpinModel::coloring(3).unwrap();
    let err = enumerate(&m, &Graph::empty(4), 10).unwrap_err();
    assert!(matches!(err, Error::BudgetExceeded { .. }));
}

#[test]
fn single_vertex_uniform_chain() {
    let (m, g) = single_vertex_q2();
    let c = build_chain(&m, &g, false, 100).unwrap();
    let p = c.matrix().unwrap();
    assert!(p.iter().all(|&x| close(x, 0.5, 1e-15)));
    assert!(close(relaxation_time(&c).unwrap(), 1.0, 1e-12));
    assert_eq!(mixing_time(&c, DEFAULT_HORIZON).unwrap(), 1);
    let s = sandwich_check(&c, DEFAULT_HORIZON, 1e-9).unwrap();
    assert!(s.pass());
    assert!(close(s.upper, 1.0 + 0.5 * 2f64.ln(), 1e-12));
}

#[test]
fn single_state_chain() {
    let m = SpinModel::coloring(1).unwrap();
    let c = build_chain(&m, &Graph::empty(1), false, 10).unwrap();
    assert_eq!(relaxation_time(&c).unwrap(), 1.0);
    assert_eq!(mixing_time(&c, 10).unwrap(), 0);
}

#[test]
fn edge_hardcore_relaxation_pinned() {
    // non-lazy spectrum {1, 3/4, 1/4}; lazy {1, 7/8, 5/8}
    let m = SpinModel::hardcore(0.0).unwrap();
    let g = Graph::path(2);
    let c = build_chain(&m, &g, true, 100).unwrap();
    assert!(close(relaxation_time(&c).unwrap(), 8.0, 1e-9));
    let c = build_chain(&m, &g, false, 100).unwrap();
    assert!(close(relaxation_time(&c).unwrap(), 4.0, 1e-9));
    let ev = spectrum(c.matrix().unwrap(), &c.stationary);
    assert!(close(ev[1], 0.75, 1e-12) && close(ev[2], 0.25, 1e-12));
}

#[test]
fn frozen_triangle_is_degenerate() {
    let m = SpinModel::coloring(3).unwrap();
    let c = build_chain(&m, &Graph::complete(3), true, 100).unwrap();
    assert!(!is_irreducible(c.matrix().unwrap()));
    assert!(matches!(relaxation_time(&c), Err(Error::DegenerateChain(_))));
    assert!(matches!(mixing_time(&c, 100), Err(Error::DegenerateChain(_))));
    let s = sandwich_check(&c, 100, 1e-9).unwrap();
    assert!(s.vacuous && s.pass());
}

#[test]
fn triangle_q4_sandwich() {
    let m = SpinModel::coloring(4).unwrap();
    let c = build_chain(&m, &Graph::complete(3), true, 1000).unwrap();
    let s = sandwich_check(&c, DEFAULT_HORIZON, 1e-9).unwrap();
    assert!(s.pass(), "{s:?}");
    assert!(!s.vacuous);
}

#[test]
fn edge_hardcore_beta_one_sandwich() {
    let m = SpinModel::hardcore(1.0).unwrap();
    let c = build_chain(&m, &Graph::path(2), true, 100).unwrap();
    assert!(sandwich_check(&c, DEFAULT_HORIZON, 1e-9).unwrap().pass());
}

#[test]
fn mixing_time_matches_power_iteration() {
    let m = SpinModel::hardcore(0.5).unwrap();
    let g = Graph::path(3);
    let c = build_chain(&m, &g, true, 100).unwrap();
    let p = c.matrix().unwrap();
    let mut cur = DMatrix::identity(p.nrows(), p.nrows());
    let mut t = 0;
    while worst_tv(&cur, &c.stationary) > mixing_threshold() {
        cur = &cur * p;
        t += 1;
    }
    assert_eq!(mixing_time(&c, DEFAULT_HORIZON).unwrap(), t);
    assert!(matches!(mixing_time(&c, 1), Err(Error::HorizonExceeded(1))));
}

#[test]
fn stationary_matches_long_run() {
    let m = SpinModel::hardcore(0.7).unwrap();
    let c = build_chain(&m, &Graph::cycle(4), true, 100).unwrap();
    let mut row = DMatrix::from_element(1, c.len(), 0.0);
    row[(0, 0)] = 1.0;
    let p = c.matrix().unwrap();
    for _ in 0..2000 {
        row = &row * p;
    }
    for (a, b) in row.iter().zip(&c.stationary) {
        assert!(close(*a, *b, 1e-9));
    }
}

#[test]
fn cheeger_examples() {
    let (m, g) = single_vertex_q2();
    let c = build_chain(&m, &g, true, 10).unwrap();
    let b = cheeger_bound(&c, CheegerReading::AllPairs).unwrap();
    assert!(close(b.epsilon, 0.125, 1e-15));
    assert!(close(b.bound, 128.0, 1e-9));
    let g = Graph::path(2);
    let c = build_chain(&SpinModel::coloring(3).unwrap(), &g, true, 100).unwrap();
    assert!(matches!(
        cheeger_bound(&c, CheegerReading::AllPairs),
        Err(Error::HypothesisNotMet(_))
    ));
    let nz = cheeger_bound(&c, CheegerReading::NonzeroPairs).unwrap();
    assert!(nz.bound >= mixing_time(&c, DEFAULT_HORIZON).unwrap() as f64);
}

#[test]
fn canonical_paths_examples() {
    let r = canonical_path_bound(&SpinModel::hardcore(0.0).unwrap(), &Graph::empty(1), 100).unwrap();
    assert_eq!(r.length, 2);
    assert!(r.pass);
    // every transition carries three of the nine pairs: ρ = (1/3)/(1/24)
    let r = canonical_path_bound(&SpinModel::hardcore(0.0).unwrap(), &Graph::path(2), 100).unwrap();
    assert_eq!(r.length, 2);
    assert!(close(r.congestion, 8.0, 1e-9));
    assert!(close(r.bound, 16.0, 1e-9));
    assert!(close(r.tau, 8.0, 1e-9));
    let r = canonical_path_bound(&SpinModel::hardcore(0.5).unwrap(), &Graph::star(4), 1000).unwrap();
    assert!(r.pass, "{r:?}");
    assert!(canonical_path_bound(&SpinModel::coloring(3).unwrap(), &Graph::path(2), 100).is_err());
}

#[test]
fn rational_balance_for_unit_weights() {
    for (m, g) in [
        (SpinModel::coloring(3).unwrap(), Graph::cycle(4)),
        (SpinModel::hardcore(0.0).unwrap(), Graph::star(3)),
    ] {
        for lazy in [false, true] {
            let c = build_chain(&m, &g, lazy, 1000).unwrap();
            assert!(detailed_balance_rational(&c, &m, &g).unwrap());
        }
    }
    let m = SpinModel::hardcore(0.5).unwrap();
    let c = build_chain(&m, &Graph::path(2), false, 10).unwrap();
    assert!(detailed_balance_rational(&c, &m, &Graph::path(2)).is_err());
    assert!(detailed_balance_defect(&c).unwrap() < 1e-15);
    assert!(row_sum_defect(&c).unwrap() < 1e-15);
}

#[test]
fn rayleigh_below_tau() {
    let m = SpinModel::hardcore(0.3).unwrap();
    let c = build_chain(&m, &Graph::path(3), false, 100).unwrap();
    let tau = relaxation_time(&c).unwrap();
    for k in 0..c.len() {
        let f: Vec<f64> = (0..c.len()).map(|i| ((i * 7 + k) % 5) as f64).collect();
        if let Ok(r) = rayleigh_ratio(&c, &f) {
            assert!(r <= tau + 1e-9);
        }
    }
}

#[test]
fn dump_format() {
    let (m, g) = single_vertex_q2();
    let c = build_chain(&m, &g, false, 10).unwrap();
    let d = dump_chain(&c);
    let lines: Vec<&str> = d.lines().collect();
    assert_eq!(lines[0], "states 2 vertices 1");
    assert!(lines[1].starts_with("0 5.0"));
    assert_eq!(lines.len(), 5);
}

#[test]
fn conditional_law_of_path_middle() {
    let m = SpinModel::coloring(3).unwrap();
    let g = Graph::path(3);
    let law = conditional_law(&m, &g, &[1], &[0, 0, 2], 100).unwrap();
    assert_eq!(law.states, vec![vec![1]]);
    assert!(matches!(
        conditional_law(&m, &g, &[1], &[0, 0, 1], 100).map(|l| l.states),
        Ok(_)
    ));
    let m2 = SpinModel::coloring(2).unwrap();
    assert!(matches!(
        conditional_law(&m2, &g, &[1], &[0, 0, 1], 100),
        Err(Error::BoundaryInfeasible)
    ));
}

#[test]
fn block_composition_one_block_is_equality() {
    let m = SpinModel::hardcore(0.4).unwrap();
    let g = Graph::path(3);
    let c = build_chain(&m, &g, false, 100).unwrap();
    let part = BlockPartition::new(vec![Block::general(vec![0, 1, 2])], None);
    let r = block_composition_check(&c, &m, &g, &part, 1000, 1).unwrap();
    assert!(close(r.tau_block, 1.0, 1e-9));
    assert!(close(r.tau_blocks[0], r.tau, 1e-9));
    assert!(r.pass);
}

#[test]
fn block_composition_singleton_vertex() {
    let (m, g) = single_vertex_q2();
    let c = build_chain(&m, &g, false, 10).unwrap();
    let r = block_composition_check(&c, &m, &g, &BlockPartition::singletons(1), 10, 1).unwrap();
    assert!(close(r.tau, 1.0, 1e-12) && close(r.bound, 1.0, 1e-12));
}

#[test]
fn block_composition_path_split() {
    let m = SpinModel::coloring(3).unwrap();
    let g = Graph::path(3);
    let c = build_chain(&m, &g, false, 100).unwrap();
    let part = BlockPartition::new(vec![Block::general(vec![0]), Block::tree(vec![1, 2])], None);
    let r = block_composition_check(&c, &m, &g, &part, 1000, 1).unwrap();
    assert_eq!(r.multiplicity, 1);
    assert!(close(r.tau, 12.349158358118126, 1e-9));
    assert!(close(r.tau_block, 4.0, 1e-9));
    assert!(close(r.tau_blocks[0], 1.0, 1e-12));
    assert!(close(r.tau_blocks[1], 4.0 + 2.0 * 2f64.sqrt(), 1e-9));
    assert!(r.pass);
}

#[test]
fn skeleton_single_vertex_is_root_law() {
    // W = {0}, one piece {0, 1}, outside vertex 2 fixed
    let g = Graph::path(3);
    let m = SpinModel::coloring(3).unwrap();
    let block = Block {
        kind: crate::decomposition::BlockKind::Skeleton,
        vertices: vec![0, 1],
        skeleton: Some(vec![0]),
        pieces: Some(vec![crate::decomposition::Piece { root: 0, vertices: vec![0, 1] }]),
    };
    let s = vec![0, 0, 2];
    let j = skeleton_joint(&m, &g, &block, &s, 100).unwrap();
    let law = conditional_law(&m, &g, &[0], &s, 100).unwrap();
    let marg = crate::dynamics::TreeMessages::compute(&m, &g, &[0, 1], &s, &[0]).unwrap();
    for (st, p) in j.states.iter().zip(&j.probs) {
        assert!(close(*p, marg.root_marginal()[st[0]], 1e-15));
    }
    assert_eq!(law.states.len(), 2);
}

#[test]
fn skeleton_triangle_uniform() {
    let zoo = skeleton_zoo();
    let tri = &zoo[0];
    let j = skeleton_joint(&tri.model, &tri.graph, &tri.block, &tri.outside, 100).unwrap();
    assert_eq!(j.states.len(), 6);
    assert!(j.probs.iter().all(|&p| close(p, 1.0 / 6.0, 1e-15)));
}

#[test]
fn skeleton_budget() {
    let tri = &skeleton_zoo()[0];
    assert!(matches!(
        skeleton_joint(&tri.model, &tri.graph, &tri.block, &tri.outside, 10),
        Err(Error::BudgetExceeded { .. })
    ));
}

#[test]
fn skeleton_zoo_matches_enumeration() {
    let zoo = skeleton_zoo();
    assert_eq!(zoo.len(), 10);
    for inst in &zoo {
        let law = conditional_law(&inst.model, &inst.graph, &inst.block.vertices, &inst.outside, 1 << 20)
            .unwrap();
        let composed =
            skeleton_block_law(&inst.model, &inst.graph, &inst.block, &inst.outside, &law, 1 << 20)
                .unwrap();
        let tv: f64 = 0.5 * composed.iter().zip(&law.probs).map(|(a, b)| (a - b).abs()).sum::<f64>();
        assert!(tv <= 1e-12, "{}: {tv}", inst.name);
        assert!(composed.iter().sum::<f64>() > 1.0 - 1e-12, "{}", inst.name);
    }
}

#[test]
fn psi_examples() {
    let g = Graph::path(3);
    let all = VertexSet::new((0..3).collect());
    assert_eq!(psi_weight(&g, &all, 1, 0.5).unwrap(), 0.0);
    let mid = VertexSet::new(vec![1]);
    assert!(close(psi_weight(&g, &mid, 1, 0.5).unwrap(), 1.0, 1e-15));
    assert!(psi_weight(&g, &mid, 0, 0.5).is_err());
}

#[test]
fn path_density_examples() {
    assert_eq!(path_density(&Graph::empty(1), &[0], 0).unwrap(), 0);
    assert_eq!(path_density(&Graph::path(3), &[0, 1, 2], 0).unwrap(), 4);
    assert_eq!(path_density(&Graph::star(4), &[0, 1, 2, 3, 4], 0).unwrap(), 5);
}

#[test]
fn thresholds() {
    assert_eq!(coloring_q_threshold(0.25), 96);
    assert_eq!(coloring_q_threshold(0.9), 14);
    assert!(close(32.0 * soft_norm_threshold(0.25).sinh(), 0.25, 1e-15));
}

#[test]
fn decay_examples() {
    let g = Graph::empty(1);
    let t = VertexSet::new(vec![0]);
    let r = tree_decay_check(&SpinModel::coloring(3).unwrap(), &g, &t, 0, 0.25, 100, 1).unwrap();
    assert_eq!(r.observed, 1.0);
    assert!(r.pass);

    // path of three inside a path of five: both ends see one boundary vertex
    let g = Graph::path(5);
    let t = VertexSet::new(vec![1, 2, 3]);
    for v in 1..4 {
        let r = tree_decay_check(&SpinModel::coloring(50).unwrap(), &g, &t, v, 0.25, 100, 1).unwrap();
        assert!(!r.sampled);
        assert!(r.pass && r.margin > 0.0, "{r:?}");
    }

    let g = Graph::path(4);
    let t = VertexSet::new(vec![1, 2]);
    let r = tree_decay_check(&SpinModel::hardcore(0.1).unwrap(), &g, &t, 1, 0.5, 100, 1).unwrap();
    assert_eq!(r.boundaries, 4);
    assert!(r.pass && !r.hypothesis_met);
    assert!(close(r.psi, 0.75, 1e-15));
}
