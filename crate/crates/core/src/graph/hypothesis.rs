use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{alpha_weights, max_path_alpha_weight_with, tree_excess, Graph, LogBase};
use crate::report::CheckRecord;
use crate::{rng, Error, Result};

/// Parameters of the local sparsity hypothesis: for every vertex the ball of
/// radius `⌈a log n⌉` has tree excess at most `t`, and every path of that
/// length has α-weight below `δ log n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisParams {
    pub a: f64,
    pub alpha: f64,
    pub t: u32,
    pub delta: f64,
}

impl HypothesisParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) {
            return Err(Error::invalid("a must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid("alpha must lie in (0,1)"));
        }
        if !(self.delta > 0.0) {
            return Err(Error::invalid("delta must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub pass: bool,
    pub radius: usize,
    pub log_n: f64,
    pub max_tree_excess: i64,
    pub excess_violations: Vec<usize>,
    pub m_alpha: f64,
    pub m_alpha_bound: f64,
    pub m_alpha_path: Vec<usize>,
    pub records: Vec<CheckRecord>,
}

pub fn check_hypothesis(
    g: &Graph,
    p: &HypothesisParams,
    base: LogBase,
    budget: u64,
) -> Result<HypothesisReport> {
    p.validate()?;
    let n = g.n();
    let log_n = base.log(n.max(1) as f64);
    let radius = base.radius(p.a, n);

    let excess: Vec<i64> = (0..n)
        .into_par_iter()
        .map(|v| tree_excess(g, v, radius))
        .collect();
    let excess_violations: Vec<usize> = (0..n).filter(|&v| excess[v] > p.t as i64).collect();
    let max_tree_excess = excess.iter().copied().max().unwrap_or(0);

    let phi: Vec<f64> = alpha_weights(g, p.alpha, 0.0).iter().map(|w| w.value).collect();
    let best = max_path_alpha_weight_with(g, &phi, radius, budget)?;
    let m_alpha_bound = p.delta * log_n;
    let m_pass = best.value < m_alpha_bound;

    let excess_record = CheckRecord::new(
        "tree_excess",
        excess_violations.is_empty(),
        max_tree_excess as f64,
        p.t as f64,
    )
    .with_witness(json!({ "radius": radius, "vertices": excess_violations }));
    let path_record = CheckRecord::new("max_path_alpha_weight", m_pass, best.value, m_alpha_bound)
        .with_witness(json!({ "radius": radius, "path": best.path }));

    Ok(HypothesisReport {
        pass: excess_violations.is_empty() && m_pass,
        radius,
        log_n,
        max_tree_excess,
        excess_violations,
        m_alpha: best.value,
        m_alpha_bound,
        m_alpha_path: best.path,
        records: vec![excess_record, path_record],
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub trials: usize,
    pub skipped: usize,
    pub violations: usize,
    pub worst_ratio: f64,
    pub worst_set: Vec<usize>,
    pub pass: bool,
}

/// Samples connected vertex sets of size `smin` by random breadth-first
/// growth and checks that each has at most `(h − 1)·|Γ|` vertices at
/// distance exactly one. Trials whose start lies in a component smaller than
/// `smin` are retried from a fresh start up to 100 times, then skipped.
pub fn expansion_probe(
    g: &Graph,
    smin: usize,
    h: f64,
    trials: usize,
    seed: u64,
) -> Result<ExpansionReport> {
    if smin == 0 || !(h > 1.0) {
        return Err(Error::invalid("expansion probe needs smin >= 1 and h > 1"));
    }
    let n = g.n();
    let results: Vec<Option<(f64, Vec<usize>)>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = rng::stream(seed, trial as u64);
            for _ in 0..100 {
                let start = rng.random_range(0..n);
                if let Some(set) = grow(g, start, smin, &mut rng) {
                    let boundary = set_boundary(g, &set);
                    return Some((boundary as f64 / set.len() as f64, set));
                }
            }
            None
        })
        .collect();
    let mut report = ExpansionReport {
        trials,
        skipped: 0,
        violations: 0,
        worst_ratio: 0.0,
        worst_set: Vec::new(),
        pass: true,
    };
    for r in results {
        match r {
            None => report.skipped += 1,
            Some((ratio, set)) => {
                if ratio > h - 1.0 {
                    report.violations += 1;
                }
                if ratio > report.worst_ratio || report.worst_set.is_empty() {
                    report.worst_ratio = ratio;
                    report.worst_set = set;
                }
            }
        }
    }
    report.pass = report.violations == 0;
    Ok(report)
}

fn grow(g: &Graph, start: usize, size: usize, rng: &mut rng::Rng) -> Option<Vec<usize>> {
    let mut inside = std::collections::HashSet::new();
    inside.insert(start);
    let mut set = vec![start];
    let mut frontier: Vec<usize> = g.neighbors(start).to_vec();
    while set.len() < size {
        frontier.retain(|w| !inside.contains(w));
        frontier.sort_unstable();
        frontier.dedup();
        if frontier.is_empty() {
            return None;
        }
        let pick = frontier.swap_remove(rng.random_range(0..frontier.len()));
        inside.insert(pick);
        set.push(pick);
        frontier.extend(g.neighbors(pick).iter().copied());
    }
    set.sort_unstable();
    Some(set)
}

fn set_boundary(g: &Graph, set: &[usize]) -> usize {
    let mut out: Vec<usize> = set
        .iter()
        .flat_map(|&u| g.neighbors(u).iter().copied())
        .filter(|w| set.binary_search(w).is_err())
        .collect();
    out.sort_unstable();
    out.dedup();
    out.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, t: u32) -> HypothesisParams {
        HypothesisParams {
            a,
            alpha: 0.5,
            t,
            delta: 100.0,
        }
    }

    #[test]
    fn tree_passes_excess_clause() {
        let g = Graph::path(20);
        let r = check_hypothesis(&g, &params(1.0, 0), LogBase::E, 1_000_000).unwrap();
        assert!(r.excess_violations.is_empty());
        assert_eq!(r.max_tree_excess, 0);
    }

    #[test]
    fn triangle_with_pendant_path_fails_at_triangle() {
        // triangle 0-1-2, pendant path 2-3-4-5-6
        let g = Graph::from_edges(7, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (5, 6)])
            .unwrap();
        let r = check_hypothesis(&g, &params(2.0 / 7f64.ln(), 0), LogBase::E, 1_000_000).unwrap();
        assert!(r.radius >= 2);
        assert!(!r.pass);
        for v in [0, 1, 2] {
            assert!(r.excess_violations.contains(&v));
        }
        assert!(!r.records[0].pass);
    }

    #[test]
    fn expansion_examples() {
        let c = Graph::cycle(10);
        let r = expansion_probe(&c, 3, 2.0, 50, 1).unwrap();
        assert_eq!(r.skipped, 0);
        assert!((r.worst_ratio - 2.0 / 3.0).abs() < 1e-15);
        let k = Graph::complete(5);
        let r = expansion_probe(&k, 2, 3.0, 20, 1).unwrap();
        assert!((r.worst_ratio - 1.5).abs() < 1e-15);
        assert!(r.pass);
    }
}
