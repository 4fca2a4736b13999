//! Feasible starting configurations.
//!
//! For colorings, vertices of degree above a cap are removed; if what remains
//! is a union of trees and unicyclic components it is colored with at most
//! three colors, and the removed vertices are put back greedily.

use super::{Configuration, ModelKind, SpinModel};
use crate::graph::Graph;
use crate::{Error, Result};

pub fn initial_configuration(m: &SpinModel, g: &Graph, degree_cap: usize) -> Result<Configuration> {
    match m.kind() {
        ModelKind::Hardcore | ModelKind::Soft => Ok(vec![0; g.n()]),
        ModelKind::Coloring => peel_and_color(g, m.q(), degree_cap),
    }
}

/// Tries degree caps from `min(q − 3, Δ)` downward and returns the first
/// that yields a feasible coloring. Non-coloring models use cap 0.
pub fn auto_degree_cap(m: &SpinModel, g: &Graph) -> Result<(usize, Configuration)> {
    if m.kind() != ModelKind::Coloring {
        return Ok((0, initial_configuration(m, g, 0)?));
    }
    if m.q() < 3 {
        return Err(Error::invalid("peeling needs q >= 3"));
    }
    let top = (m.q() - 3).min(g.max_degree());
    let mut last = None;
    for cap in (0..=top).rev() {
        match peel_and_color(g, m.q(), cap) {
            Ok(c) => return Ok((cap, c)),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one cap tried"))
}

fn peel_and_color(g: &Graph, q: usize, cap: usize) -> Result<Configuration> {
    if q < cap + 3 {
        return Err(Error::invalid(format!("q={q} below degree cap + 3 = {}", cap + 3)));
    }
    let n = g.n();
    let kept: Vec<bool> = (0..n).map(|v| g.degree(v) <= cap).collect();
    let mut color = vec![usize::MAX; n];
    for comp in g.components_within(&kept) {
        let excess = g.induced_edge_count(&comp) as i64 - comp.len() as i64 + 1;
        if excess >= 2 {
            return Err(Error::PeeledNotUnicyclic {
                witness: comp[0],
                excess,
            });
        }
        color_component(g, &kept, &comp, &mut color);
    }
    let mut removed: Vec<usize> = (0..n).filter(|&v| !kept[v]).collect();
    removed.sort_by(|&a, &b| g.degree(b).cmp(&g.degree(a)).then(a.cmp(&b)));
    let mut used = vec![false; q];
    for v in removed {
        used.fill(false);
        for &w in g.neighbors(v) {
            if color[w] < q {
                used[color[w]] = true;
            }
        }
        color[v] = used
            .iter()
            .position(|&u| !u)
            .ok_or(Error::PaletteExhausted { vertex: v })?;
    }
    Ok(color)
}

/// Two-colors the BFS tree of a tree or unicyclic component by parity; an odd
/// cycle is repaired by giving one endpoint of the non-tree edge color 2.
fn color_component(g: &Graph, kept: &[bool], comp: &[usize], color: &mut [usize]) {
    let root = comp[0];
    let mut parent = std::collections::HashMap::new();
    parent.insert(root, usize::MAX);
    color[root] = 0;
    let mut queue = std::collections::VecDeque::from([root]);
    let mut extra = None;
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u) {
            if !kept[w] {
                continue;
            }
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(w) {
                e.insert(u);
                color[w] = 1 - color[u];
                queue.push_back(w);
            } else if parent[&u] != w && u < w {
                extra = Some((u, w));
            }
        }
    }
    if let Some((u, w)) = extra {
        if color[u] == color[w] {
            color[w] = 2;
        }
    }
}

/// Greedy coloring in the given vertex order, smallest legal color first.
pub fn greedy_coloring(g: &Graph, q: usize, order: &[usize]) -> Result<Configuration> {
    let mut color = vec![usize::MAX; g.n()];
    let mut used = vec![false; q];
    for &v in order {
        used.fill(false);
        for &w in g.neighbors(v) {
            if color[w] < q {
                used[color[w]] = true;
            }
        }
        color[v] = used
            .iter()
            .position(|&u| !u)
            .ok_or(Error::PaletteExhausted { vertex: v })?;
    }
    if color.iter().any(|&c| c == usize::MAX) {
        return Err(Error::invalid("order does not cover every vertex"));
    }
    Ok(color)
}
