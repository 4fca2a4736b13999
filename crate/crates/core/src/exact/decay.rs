//! Correlation decay on trees against the boundary weighting
//! `ψ_λ(v) = Σ_{w ∈ ∂⁺U} λ^{d(w,v)}`.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dynamics::TreeMessages;
use crate::graph::{boundaries, Graph, VertexSet, UNREACHABLE};
use crate::model::{ModelKind, SpinModel};
use crate::rng;
use crate::{Error, Result};

/// Boundaries enumerated exhaustively up to this count, sampled beyond it.
pub const EXHAUSTIVE_BOUNDARIES: u64 = 10_000;

/// `ψ_λ(v)` with distances taken in the whole graph.
pub fn psi_weight(g: &Graph, u: &VertexSet, v: usize, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::invalid("lambda must lie in (0, 1)"));
    }
    if !u.contains(v) {
        return Err(Error::invalid(format!("vertex {v} is not in U")));
    }
    let (_, ext) = boundaries(g, u);
    let d = g.bfs_distances(v);
    Ok(ext
        .iter()
        .filter(|&w| d[w] != UNREACHABLE)
        .map(|w| lambda.powi(d[w] as i32))
        .sum())
}

/// `ελ/α²`, the bound on `ψ_λ` when every exterior boundary vertex is
/// `(c, α, ε)`-good and `λ ≤ α²`.
pub fn psi_good_boundary_bound(eps: f64, lambda: f64, alpha: f64) -> f64 {
    eps * lambda / (alpha * alpha)
}

/// Smallest number of colours with `q ≥ max(4e, 8/λ + 4/λ²)`.
pub fn coloring_q_threshold(lambda: f64) -> usize {
    let e4 = 4.0 * std::f64::consts::E;
    e4.max(8.0 / lambda + 4.0 / (lambda * lambda)).ceil() as usize
}

/// Largest norm `H*` with `32 sinh(H*) = λ`; soft models with `‖H‖ < H*`
/// satisfy the decay inequality.
pub fn soft_norm_threshold(lambda: f64) -> f64 {
    (lambda / 32.0).asinh()
}

/// Largest degree sum along a self-avoiding path in the tree `t` starting
/// at `root`, with degrees taken in `g`. Returns 0 when the only path is
/// `root` itself and it has degree 0.
pub fn path_density(g: &Graph, t: &[usize], root: usize) -> Result<usize> {
    let mask = g.mask(t);
    if !mask.get(root).copied().unwrap_or(false) {
        return Err(Error::invalid("root is not in the tree"));
    }
    if !g.is_forest(t) {
        return Err(Error::NotAForest { witness: root });
    }
    let mut best = 0;
    let mut stack = vec![(root, usize::MAX, g.degree(root))];
    while let Some((u, parent, sum)) = stack.pop() {
        best = best.max(sum);
        for &w in g.neighbors(u) {
            if w != parent && mask[w] {
                stack.push((w, u, sum + g.degree(w)));
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayReport {
    pub kind: ModelKind,
    pub vertex: usize,
    pub psi: f64,
    /// `exp(ψ)` for coloring, `ψ` otherwise
    pub bound: f64,
    /// largest marginal ratio (coloring) or pairwise TV (otherwise)
    pub observed: f64,
    pub margin: f64,
    pub boundaries: u64,
    pub skipped: u64,
    pub sampled: bool,
    /// whether the model parameters meet the lemma's regime for this `λ`
    pub hypothesis_met: bool,
    pub pass: bool,
}

/// Largest TV distance between two of `laws`, as the largest spread
/// `max_i P_i(A) − min_i P_i(A)` over state subsets `A`.
fn max_pairwise_tv(laws: &[Vec<f64>]) -> f64 {
    let Some(q) = laws.first().map(Vec::len) else {
        return 0.0;
    };
    if q > 16 {
        let mut tv: f64 = 0.0;
        for i in 0..laws.len() {
            for j in i + 1..laws.len() {
                let d: f64 = laws[i].iter().zip(&laws[j]).map(|(a, b)| (a - b).abs()).sum();
                tv = tv.max(0.5 * d);
            }
        }
        return tv;
    }
    let mut best: f64 = 0.0;
    for mask in 1u32..(1 << q) - 1 {
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        for p in laws {
            let mass: f64 = (0..q).filter(|x| mask >> x & 1 == 1).map(|x| p[x]).sum();
            hi = hi.max(mass);
            lo = lo.min(mass);
        }
        best = best.max(hi - lo);
    }
    best
}

/// Restricted growth strings of length `len` with at most `q` blocks: one
/// boundary per class under permutation of colours.
fn growth_strings(len: usize, q: usize, cap: u64) -> Option<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; len];
    fn rec(
        i: usize,
        max: usize,
        q: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: u64,
    ) -> bool {
        if i == cur.len() {
            out.push(cur.clone());
            return (out.len() as u64) <= cap;
        }
        let top = if i == 0 { 0 } else { (max + 1).min(q - 1) };
        for x in 0..=top {
            cur[i] = x;
            if !rec(i + 1, max.max(x), q, cur, out, cap) {
                return false;
            }
        }
        true
    }
    if len == 0 {
        return Some(vec![Vec::new()]);
    }
    rec(0, 0, q, &mut cur, &mut out, cap).then_some(out)
}

fn all_assignments(len: usize, q: usize) -> Vec<Vec<usize>> {
    let total = q.pow(len as u32);
    (0..total)
        .map(|mut i| {
            let mut a = vec![0; len];
            for x in a.iter_mut().rev() {
                *x = i % q;
                i /= q;
            }
            a
        })
        .collect()
}

/// Worst boundary effect at `v` over boundary conditions on `∂⁺T`.
///
/// Coloring compares `max_{x,y} P(σ(v)=x | η) / P(σ(v)=y | η)` (over `y`
/// with positive probability) with `exp(ψ_λ(v))`; hardcore and soft compare
/// the largest TV distance between the laws at `v` under two boundaries
/// with `ψ_λ(v)`. Boundaries are enumerated when there are at most
/// [`EXHAUSTIVE_BOUNDARIES`] (up to colour permutation for coloring) and
/// otherwise `boundary_samples` are drawn uniformly.
pub fn tree_decay_check(
    m: &SpinModel,
    g: &Graph,
    t: &VertexSet,
    v: usize,
    lambda: f64,
    boundary_samples: u64,
    seed: u64,
) -> Result<DecayReport> {
    if !g.is_forest(t.as_slice()) || g.components_within(&g.mask(t.as_slice())).len() != 1 {
        return Err(Error::NotAForest { witness: v });
    }
    let psi = psi_weight(g, t, v, lambda)?;
    let (_, ext) = boundaries(g, t);
    let ext = ext.into_vec();
    let q = m.q();
    let b = ext.len();

    let exhaustive_count = (q as f64).powi(b as i32);
    let mut sampled = false;
    let bnds: Vec<Vec<usize>> = match m.kind() {
        ModelKind::Coloring => match growth_strings(b, q, EXHAUSTIVE_BOUNDARIES) {
            Some(list) => list,
            None => {
                sampled = true;
                Vec::new()
            }
        },
        _ if exhaustive_count <= EXHAUSTIVE_BOUNDARIES as f64 => all_assignments(b, q),
        _ => {
            sampled = true;
            Vec::new()
        }
    };
    let bnds = if sampled {
        let mut r = rng::seeded(seed);
        (0..boundary_samples)
            .map(|_| (0..b).map(|_| r.random_range(0..q)).collect())
            .collect()
    } else {
        bnds
    };

    let mut s = vec![0usize; g.n()];
    let mut marginals: Vec<Vec<f64>> = Vec::with_capacity(bnds.len());
    let mut skipped = 0;
    let mut worst_ratio: f64 = 1.0;
    for eta in &bnds {
        for (&w, &x) in ext.iter().zip(eta) {
            s[w] = x;
        }
        let msgs = match TreeMessages::compute(m, g, t.as_slice(), &s, &[v]) {
            Ok(msgs) => msgs,
            Err(Error::BoundaryInfeasible) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let p = msgs.root_marginal();
        if m.kind() == ModelKind::Coloring {
            let max = p.iter().cloned().fold(0.0, f64::max);
            let min = p.iter().cloned().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min);
            worst_ratio = worst_ratio.max(max / min);
        } else {
            marginals.push(p.to_vec());
        }
    }

    let (observed, bound, hypothesis_met) = match m.kind() {
        ModelKind::Coloring => (worst_ratio, psi.exp(), q >= coloring_q_threshold(lambda)),
        kind => {
            let tv = max_pairwise_tv(&marginals);
            let met = if kind == ModelKind::Hardcore {
                m.beta().unwrap_or(0.0) <= lambda.ln()
            } else {
                m.model_norm().value < soft_norm_threshold(lambda)
            };
            (tv, psi, met)
        }
    };
    Ok(DecayReport {
        kind: m.kind(),
        vertex: v,
        psi,
        bound,
        observed,
        margin: bound - observed,
        boundaries: bnds.len() as u64,
        skipped,
        sampled,
        hypothesis_met,
        pass: observed <= bound + 1e-12,
    })
}
