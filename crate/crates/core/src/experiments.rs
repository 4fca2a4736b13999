//! Mixing-time scaling experiments driven by coupling coalescence.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::coalescence_time;
use crate::graph::{generate_er, Graph};
use crate::model::{greedy_coloring, Configuration, ModelKind, SpinModel};
use crate::{Error, Result};

/// Default cap on coupled updates per cell.
pub const DEFAULT_SCALING_HORIZON: u64 = 100_000_000;

/// Two far-apart feasible starts.
///
/// Coloring: a greedy coloring in forward vertex order, and a greedy
/// coloring in backward order that avoids the first one's colour wherever
/// the palette allows. Hardcore: the empty set and a greedy maximal
/// independent set. Soft: all vertices in the first state against all in
/// the last.
pub fn adversarial_pair(m: &SpinModel, g: &Graph) -> Result<(Configuration, Configuration)> {
    let n = g.n();
    match m.kind() {
        ModelKind::Coloring => {
            let q = m.q();
            let order: Vec<usize> = (0..n).collect();
            let left = greedy_coloring(g, q, &order)?;
            let mut right = vec![usize::MAX; n];
            let mut used = vec![false; q];
            for v in (0..n).rev() {
                used.fill(false);
                for &w in g.neighbors(v) {
                    if right[w] < q {
                        used[right[w]] = true;
                    }
                }
                right[v] = (0..q)
                    .find(|&x| !used[x] && x != left[v])
                    .or_else(|| (!used[left[v]]).then_some(left[v]))
                    .ok_or(Error::PaletteExhausted { vertex: v })?;
            }
            Ok((left, right))
        }
        ModelKind::Hardcore => {
            let mut right = vec![0; n];
            for v in (0..n).rev() {
                if g.neighbors(v).iter().all(|&w| right[w] == 0) {
                    right[v] = 1;
                }
            }
            Ok((vec![0; n], right))
        }
        ModelKind::Soft => Ok((vec![0; n], vec![m.q() - 1; n])),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateKind {
    Coalescence,
    Exact,
}

/// One `(n, seed)` cell. `steps` is `None` when the pair did not coalesce
/// within the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub d: f64,
    pub model: String,
    pub seed: u64,
    pub estimate: EstimateKind,
    pub steps: Option<u64>,
    pub coalesced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianRow {
    pub n: usize,
    /// median over coalesced seeds, `None` if none coalesced
    pub median: Option<f64>,
    pub coalesced: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// least-squares slope of `ln(median)` against `ln n`; `None` with
    /// fewer than two usable sizes
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub medians: Vec<MedianRow>,
    pub non_coalesced_fraction: f64,
}

/// Experiment parameters: model, graph family, sizes, seeds and horizon.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub model: crate::model::ModelSpec,
    pub d: f64,
    pub ns: Vec<usize>,
    pub seeds: Vec<u64>,
    pub horizon: u64,
    #[serde(default)]
    pub lazy: bool,
}

/// Wall-clock times, kept apart from the deterministic rows.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScalingMetadata {
    pub wall_ms: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    pub fit: ScalingFit,
    pub metadata: ScalingMetadata,
}

pub fn model_label(m: &SpinModel) -> String {
    match m.kind() {
        ModelKind::Coloring => format!("coloring-q{}", m.q()),
        ModelKind::Hardcore => format!("hardcore-b{}", m.beta().unwrap_or(0.0)),
        ModelKind::Soft => format!("soft-q{}-norm{}", m.q(), m.model_norm().value),
    }
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    Some(if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) })
}

/// Least-squares line through `(x, y)`; `None` with fewer than two
/// distinct `x`.
pub fn least_squares(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let k = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Medians per size and the log-log fit, skipping cells that did not
/// coalesce.
pub fn fit_scaling(rows: &[ScalingRow]) -> ScalingFit {
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let medians: Vec<MedianRow> = ns
        .iter()
        .map(|&n| {
            let cell: Vec<&ScalingRow> = rows.iter().filter(|r| r.n == n).collect();
            let steps: Vec<f64> = cell.iter().filter_map(|r| r.steps).map(|s| s as f64).collect();
            MedianRow {
                n,
                median: median(&steps),
                coalesced: steps.len(),
                total: cell.len(),
            }
        })
        .collect();
    let points: Vec<(f64, f64)> = medians
        .iter()
        .filter_map(|m| m.median.filter(|&x| x > 0.0).map(|x| ((m.n as f64).ln(), x.ln())))
        .collect();
    let fit = least_squares(&points);
    let failed = rows.iter().filter(|r| !r.coalesced).count();
    ScalingFit {
        slope: fit.map(|f| f.0),
        intercept: fit.map(|f| f.1),
        medians,
        non_coalesced_fraction: if rows.is_empty() {
            0.0
        } else {
            failed as f64 / rows.len() as f64
        },
    }
}

/// Runs every `(n, seed)` cell: generate `G(n, d/n)` from `seed`, couple
/// the [`adversarial_pair`] from the same seed, and fit the medians.
pub fn run_scaling(spec: &ExperimentSpec) -> Result<ScalingReport> {
    let m = SpinModel::from_spec(&spec.model)?;
    if spec.ns.is_empty() || spec.seeds.is_empty() {
        return Err(Error::invalid("scaling needs at least one size and one seed"));
    }
    let label = model_label(&m);
    let cells: Vec<(usize, u64)> = spec
        .ns
        .iter()
        .flat_map(|&n| spec.seeds.iter().map(move |&s| (n, s)))
        .collect();
    let results = cells
        .par_iter()
        .map(|&(n, seed)| -> Result<(ScalingRow, f64)> {
            let start = Instant::now();
            let g = generate_er(n, spec.d, seed)?;
            let pair = adversarial_pair(&m, &g)?;
            let steps = coalescence_time(&m, &g, &[pair], spec.horizon, seed, spec.lazy)?[0];
            Ok((
                ScalingRow {
                    n,
                    d: spec.d,
                    model: label.clone(),
                    seed,
                    estimate: EstimateKind::Coalescence,
                    steps,
                    coalesced: steps.is_some(),
                },
                start.elapsed().as_secs_f64() * 1e3,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let (rows, wall_ms): (Vec<ScalingRow>, Vec<f64>) = results.into_iter().unzip();
    let fit = fit_scaling(&rows);
    Ok(ScalingReport {
        rows,
        fit,
        metadata: ScalingMetadata { wall_ms },
    })
}

/// Rows as CSV, header `n,d,model,seed,estimate,steps,coalesced`, with an
/// empty `steps` field for cells that did not coalesce.
pub fn scaling_csv(rows: &[ScalingRow]) -> String {
    let mut out = String::from("n,d,model,seed,estimate,steps,coalesced\n");
    for r in rows {
        let steps = r.steps.map(|s| s.to_string()).unwrap_or_default();
        let kind = match r.estimate {
            EstimateKind::Coalescence => "coalescence",
            EstimateKind::Exact => "exact",
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n, r.d, r.model, r.seed, kind, steps, r.coalesced
        ));
    }
    out
}
