//! Coupled Glauber chains.
//!
//! Both sides use the same laziness coin and the same vertex; the two
//! conditional laws at that vertex are joined by a maximal coupling, so the
//! sides agree at `v` after the update with probability `1 − d_TV`.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{glauber_step_with, ChainState};
use crate::graph::Graph;
use crate::model::{auto_degree_cap, Configuration, ModelKind, SpinModel};
use crate::rng::{self, Rng};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingEntry {
    pub left: usize,
    pub right: usize,
    pub prob: f64,
}

/// Maximal coupling of `p` and `r`: the diagonal carries `min(p, r)` and
/// the residual masses are matched north-west-corner style, both sides in
/// ascending state order.
pub fn maximal_coupling(p: &[f64], r: &[f64]) -> Vec<CouplingEntry> {
    let q = p.len();
    let mut out = Vec::with_capacity(2 * q);
    let mut rp = vec![0.0; q];
    let mut rr = vec![0.0; q];
    for x in 0..q {
        let common = p[x].min(r[x]);
        if common > 0.0 {
            out.push(CouplingEntry {
                left: x,
                right: x,
                prob: common,
            });
        }
        rp[x] = p[x] - common;
        rr[x] = r[x] - common;
    }
    let (mut i, mut j) = (0, 0);
    while i < q && j < q {
        if rp[i] <= 0.0 {
            i += 1;
            continue;
        }
        if rr[j] <= 0.0 {
            j += 1;
            continue;
        }
        let mass = rp[i].min(rr[j]);
        out.push(CouplingEntry {
            left: i,
            right: j,
            prob: mass,
        });
        rp[i] -= mass;
        rr[j] -= mass;
    }
    out
}

fn sample_pair(entries: &[CouplingEntry], u: f64) -> (usize, usize) {
    let total: f64 = entries.iter().map(|e| e.prob).sum();
    let target = u * total;
    let mut acc = 0.0;
    for e in entries {
        acc += e.prob;
        if target < acc {
            return (e.left, e.right);
        }
    }
    let last = entries.last().expect("coupling has mass");
    (last.left, last.right)
}

#[derive(Debug, Clone)]
pub struct CoupledState {
    pub left: Configuration,
    pub right: Configuration,
    pub step: u64,
    pub rng: Rng,
}

impl CoupledState {
    pub fn new(left: Configuration, right: Configuration, seed: u64) -> Self {
        Self {
            left,
            right,
            step: 0,
            rng: rng::seeded(seed),
        }
    }

    pub fn hamming(&self) -> usize {
        hamming(&self.left, &self.right)
    }
}

fn hamming(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// One coupled update. Returns the change in Hamming distance.
pub fn coupled_step(m: &SpinModel, g: &Graph, cs: &mut CoupledState, lazy: bool) -> Result<i64> {
    let mut p = vec![0.0; m.q()];
    let mut r = vec![0.0; m.q()];
    coupled_step_with(m, g, cs, lazy, &mut p, &mut r)
}

fn coupled_step_with(
    m: &SpinModel,
    g: &Graph,
    cs: &mut CoupledState,
    lazy: bool,
    p: &mut [f64],
    r: &mut [f64],
) -> Result<i64> {
    cs.step += 1;
    if lazy && cs.rng.random::<f64>() < 0.5 {
        return Ok(0);
    }
    let n = g.n();
    if n == 0 {
        return Ok(0);
    }
    let v = cs.rng.random_range(0..n);
    m.local_conditional_into(g, &cs.left, v, p)?;
    m.local_conditional_into(g, &cs.right, v, r)?;
    let u = cs.rng.random::<f64>();
    let before = (cs.left[v] != cs.right[v]) as i64;
    let (x, y) = if p == r {
        let x = rng::sample_index(p, u);
        (x, x)
    } else {
        sample_pair(&maximal_coupling(p, r), u)
    };
    cs.left[v] = x;
    cs.right[v] = y;
    Ok((x != y) as i64 - before)
}

/// Exact `E[d_H]` after one coupled step, summing over the vertex choice and
/// the coupling at that vertex.
pub fn exact_one_step_distance(
    m: &SpinModel,
    g: &Graph,
    left: &[usize],
    right: &[usize],
    lazy: bool,
) -> Result<f64> {
    let n = g.n();
    let d0 = hamming(left, right) as f64;
    if n == 0 {
        return Ok(d0);
    }
    let mut p = vec![0.0; m.q()];
    let mut r = vec![0.0; m.q()];
    let mut total = 0.0;
    for v in 0..n {
        m.local_conditional_into(g, left, v, &mut p)?;
        m.local_conditional_into(g, right, v, &mut r)?;
        let disagree: f64 = maximal_coupling(&p, &r)
            .iter()
            .filter(|e| e.left != e.right)
            .map(|e| e.prob)
            .sum();
        let others = d0 - (left[v] != right[v]) as u8 as f64;
        total += others + disagree;
    }
    let e = total / n as f64;
    Ok(if lazy { 0.5 * d0 + 0.5 * e } else { e })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContractionReport {
    pub pairs: usize,
    /// largest `E[d_H'] − 1` over the tested pairs
    pub worst_change: f64,
    pub worst_pair: Option<(Configuration, Configuration)>,
    /// `c` with `E[d_H'] = 1 − c/n` at the worst pair
    pub implied_c: f64,
    /// every tested pair had `E[d_H'] < 1`
    pub contracting: bool,
    /// Monte Carlo mean of the one-step change over the same pairs
    pub sampled_mean_change: f64,
}

/// Draws `pairs` unit-distance pairs of feasible configurations and
/// evaluates the exact one-step expected Hamming distance for each.
///
/// Each pair starts from a feasible configuration, is randomized by `10n`
/// Glauber steps, and then has one uniformly chosen vertex moved to a
/// different state of positive conditional probability. Vertices with a
/// single allowed state are skipped.
pub fn contraction_probe(
    m: &SpinModel,
    g: &Graph,
    pairs: usize,
    seed: u64,
    lazy: bool,
) -> Result<ContractionReport> {
    let n = g.n();
    if n == 0 {
        return Err(Error::invalid("contraction probe needs a nonempty graph"));
    }
    let (_, start) = auto_degree_cap(m, g)?;
    let results: Vec<Option<(f64, f64, Configuration, Configuration)>> = (0..pairs)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let mut st = ChainState {
                config: start.clone(),
                step: 0,
                rng: rng::stream(seed, i as u64),
            };
            let mut buf = vec![0.0; m.q()];
            for _ in 0..10 * n {
                glauber_step_with(m, g, &mut st, false, &mut buf)?;
            }
            let mut candidates: Vec<usize> = (0..n).collect();
            while !candidates.is_empty() {
                let k = st.rng.random_range(0..candidates.len());
                let v = candidates.swap_remove(k);
                m.local_conditional_into(g, &st.config, v, &mut buf)?;
                let alts: Vec<usize> = (0..m.q())
                    .filter(|&x| x != st.config[v] && buf[x] > 0.0)
                    .collect();
                if alts.is_empty() {
                    continue;
                }
                let mut right = st.config.clone();
                right[v] = alts[st.rng.random_range(0..alts.len())];
                let exact = exact_one_step_distance(m, g, &st.config, &right, lazy)?;
                let mut cs = CoupledState {
                    left: st.config.clone(),
                    right: right.clone(),
                    step: 0,
                    rng: rng::stream(seed ^ 0x9e37_79b9_7f4a_7c15, i as u64),
                };
                let sampled = coupled_step(m, g, &mut cs, lazy)? as f64;
                return Ok(Some((exact - 1.0, sampled, st.config, right)));
            }
            Ok(None)
        })
        .collect::<Result<_>>()?;

    let mut report = ContractionReport {
        pairs: 0,
        worst_change: f64::NEG_INFINITY,
        worst_pair: None,
        implied_c: f64::INFINITY,
        contracting: true,
        sampled_mean_change: 0.0,
    };
    let mut sampled_total = 0.0;
    for (change, sampled, l, r) in results.into_iter().flatten() {
        report.pairs += 1;
        sampled_total += sampled;
        if change >= 0.0 {
            report.contracting = false;
        }
        if change > report.worst_change {
            report.worst_change = change;
            report.implied_c = -change * n as f64;
            report.worst_pair = Some((l, r));
        }
    }
    if report.pairs > 0 {
        report.sampled_mean_change = sampled_total / report.pairs as f64;
    }
    Ok(report)
}

/// Runs each coupled pair until the sides agree or `horizon` steps pass.
/// Pair `i` uses generator stream `i` of `seed`.
pub fn coalescence_time(
    m: &SpinModel,
    g: &Graph,
    start_pairs: &[(Configuration, Configuration)],
    horizon: u64,
    seed: u64,
    lazy: bool,
) -> Result<Vec<Option<u64>>> {
    start_pairs
        .par_iter()
        .enumerate()
        .map(|(i, (a, b))| {
            for s in [a, b] {
                m.validate_configuration(g, s)?;
                if !m.is_feasible(g, s) {
                    return Err(Error::invalid("coupled start is infeasible"));
                }
            }
            let mut cs = CoupledState {
                left: a.clone(),
                right: b.clone(),
                step: 0,
                rng: rng::stream(seed, i as u64),
            };
            let mut d = cs.hamming() as i64;
            let mut p = vec![0.0; m.q()];
            let mut r = vec![0.0; m.q()];
            while d > 0 {
                if cs.step >= horizon {
                    return Ok(None);
                }
                d += coupled_step_with(m, g, &mut cs, lazy, &mut p, &mut r)?;
            }
            Ok(Some(cs.step))
        })
        .collect()
}

/// Exact one-step expected Hamming distance for every unit-distance pair
/// of feasible configurations.
///
/// For coloring the one-step distance is invariant under permuting
/// colours, so pairs are enumerated up to that symmetry: the moved vertex
/// takes colours 0 and 1 and the remaining vertices follow a restricted
/// growth string. Other models enumerate every feasible configuration.
/// `budget` caps the number of pairs evaluated.
pub fn contraction_exhaustive(
    m: &SpinModel,
    g: &Graph,
    lazy: bool,
    budget: u64,
) -> Result<ContractionReport> {
    let n = g.n();
    if n == 0 {
        return Err(Error::invalid("contraction check needs a nonempty graph"));
    }
    let mut report = ContractionReport {
        pairs: 0,
        worst_change: f64::NEG_INFINITY,
        worst_pair: None,
        implied_c: f64::INFINITY,
        contracting: true,
        sampled_mean_change: 0.0,
    };
    let mut visit = |left: &[usize], right: &[usize]| -> Result<()> {
        report.pairs += 1;
        if report.pairs as u64 > budget {
            return Err(Error::BudgetExceeded {
                what: "unit pairs",
                reached: report.pairs as u64,
                budget,
            });
        }
        let change = exact_one_step_distance(m, g, left, right, lazy)? - 1.0;
        if change >= 0.0 {
            report.contracting = false;
        }
        if change > report.worst_change {
            report.worst_change = change;
            report.implied_c = -change * n as f64;
            report.worst_pair = Some((left.to_vec(), right.to_vec()));
        }
        Ok(())
    };

    if m.kind() == ModelKind::Coloring {
        let q = m.q();
        if q < 2 {
            return Ok(report);
        }
        for v in 0..n {
            let others: Vec<usize> = (0..n).filter(|&u| u != v).collect();
            let mut pos = vec![usize::MAX; n];
            for (i, &u) in others.iter().enumerate() {
                pos[u] = i;
            }
            let mut left = vec![usize::MAX; n];
            left[v] = 0;
            // colours used so far: 0 and 1 are taken by the moved vertex
            let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
            let mut top = vec![1usize; others.len() + 1];
            while let Some((i, x)) = stack.pop() {
                if i == others.len() {
                    let mut right = left.clone();
                    right[v] = 1;
                    visit(&left, &right)?;
                    continue;
                }
                let u = others[i];
                if x > (top[i] + 1).min(q - 1) {
                    continue;
                }
                stack.push((i, x + 1));
                let clash = g.neighbors(u).iter().any(|&w| {
                    if w == v {
                        x <= 1
                    } else {
                        pos[w] < i && left[w] == x
                    }
                });
                if clash {
                    continue;
                }
                left[u] = x;
                top[i + 1] = top[i].max(x);
                stack.push((i + 1, 0));
            }
        }
    } else {
        let chain = crate::exact::enumerate(m, g, budget)?;
        let mut right;
        for left in &chain.states {
            for v in 0..n {
                for x in 0..m.q() {
                    if x == left[v] {
                        continue;
                    }
                    right = left.clone();
                    right[v] = x;
                    if chain.index_of(&right).is_some() {
                        visit(left, &right)?;
                    }
                }
            }
        }
    }
    Ok(report)
}
