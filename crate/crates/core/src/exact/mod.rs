//! Brute-force analysis of small chains.
//!
//! States are enumerated depth-first over vertices `0, 1, …` with states in
//! ascending order, so state indices are lexicographic in `(vertex, state)`
//! and stable across runs. All matrices are dense.
//!
//! Spectral quantities are computed on the π-symmetrized matrix
//! `D^{1/2} P D^{−1/2}`, which is symmetric for reversible `P`. The spectral
//! gap is `min(1 − λ₂, 1 − |λ_min|)` and `τ = 1/gap`. The mixing time is the
//! first `t` with `max_σ ‖P^t(σ,·) − π‖_TV ≤ 1/(2e)`.

mod blocks;
mod decay;
mod skeleton;

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::model::{Configuration, SpinModel};
use crate::report::BoundRecord;
use crate::{Error, Result};

pub use blocks::{
    block_composition_check, block_transition_matrix, restricted_relaxation_times,
    BlockCompositionReport, RestrictedTimes, BOUNDARY_CAP,
};
pub use decay::{
    coloring_q_threshold, path_density, psi_good_boundary_bound, psi_weight,
    soft_norm_threshold, tree_decay_check, DecayReport, EXHAUSTIVE_BOUNDARIES,
};
pub use skeleton::{
    skeleton_block_law, skeleton_joint, skeleton_zoo, SkeletonInstance, SkeletonJoint,
};

/// Default cap on enumerated states.
pub const DEFAULT_STATE_BUDGET: u64 = 1_000_000;

/// Default cap on the mixing-time search.
pub const DEFAULT_HORIZON: u64 = 1_000_000;

/// Threshold `1/(2e)` in the mixing-time definition.
pub fn mixing_threshold() -> f64 {
    1.0 / (2.0 * std::f64::consts::E)
}

#[derive(Debug, Clone)]
pub struct ExactChain {
    pub n: usize,
    pub states: Vec<Configuration>,
    pub log_weights: Vec<f64>,
    pub stationary: Vec<f64>,
    pub transition: Option<DMatrix<f64>>,
    pub lazy: bool,
    index: HashMap<Configuration, usize>,
}

impl ExactChain {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, s: &[usize]) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn matrix(&self) -> Result<&DMatrix<f64>> {
        self.transition
            .as_ref()
            .ok_or_else(|| Error::invalid("transition matrix not built"))
    }

    pub fn min_stationary(&self) -> f64 {
        self.stationary.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Chain restricted to the states in `keep`, with π renormalized and no
    /// transition matrix.
    pub(crate) fn from_states(n: usize, states: Vec<Configuration>, log_weights: Vec<f64>) -> Self {
        let max = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut stationary: Vec<f64> = log_weights.iter().map(|&w| (w - max).exp()).collect();
        let z: f64 = stationary.iter().sum();
        stationary.iter_mut().for_each(|p| *p /= z);
        let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Self {
            n,
            states,
            log_weights,
            stationary,
            transition: None,
            lazy: false,
            index,
        }
    }
}

/// Feasible configurations and their Gibbs weights.
pub fn enumerate(m: &SpinModel, g: &Graph, budget: u64) -> Result<ExactChain> {
    let n = g.n();
    let all: Vec<usize> = (0..n).collect();
    let (states, weights) = enumerate_block(m, g, &all, &vec![0; n], budget)?;
    Ok(ExactChain::from_states(n, states, weights))
}

/// Depth-first enumeration of the states of `block` (in the given vertex
/// order) with everything else fixed to `s`. Returns full configurations
/// and the log-weight of the block given the outside.
fn enumerate_block(
    m: &SpinModel,
    g: &Graph,
    block: &[usize],
    s: &[usize],
    budget: u64,
) -> Result<(Vec<Configuration>, Vec<f64>)> {
    let q = m.q();
    let n = g.n();
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in block.iter().enumerate() {
        pos[v] = i;
    }
    let mut cur = s.to_vec();
    let mut out = Vec::new();
    let mut weights = Vec::new();
    let mut partial = vec![0.0; block.len() + 1];
    let mut choice = vec![0usize; block.len()];
    let k = block.len();
    if k == 0 {
        return Ok((vec![cur], vec![0.0]));
    }
    let mut depth = 0usize;
    choice[0] = 0;
    loop {
        if choice[depth] == q {
            if depth == 0 {
                break;
            }
            depth -= 1;
            choice[depth] += 1;
            continue;
        }
        let v = block[depth];
        let x = choice[depth];
        cur[v] = x;
        // weight of v given earlier block vertices and the outside
        let mut w = m.h(x);
        for &u in g.neighbors(v) {
            if pos[u] == usize::MAX || pos[u] < depth {
                w += m.g(cur[u], x);
            }
        }
        if w == f64::NEG_INFINITY {
            choice[depth] += 1;
            continue;
        }
        partial[depth + 1] = partial[depth] + w;
        if depth + 1 == k {
            out.push(cur.clone());
            weights.push(partial[k]);
            if out.len() as u64 > budget {
                return Err(Error::BudgetExceeded {
                    what: "enumerated states",
                    reached: out.len() as u64,
                    budget,
                });
            }
            choice[depth] += 1;
        } else {
            depth += 1;
            choice[depth] = 0;
        }
    }
    Ok((out, weights))
}

/// Conditional law of the states on `block` given the rest of `s`.
#[derive(Debug, Clone)]
pub struct ConditionalLaw {
    pub block: Vec<usize>,
    /// block states, in `block` order
    pub states: Vec<Vec<usize>>,
    pub probs: Vec<f64>,
}

impl ConditionalLaw {
    pub fn prob_of(&self, s: &[usize]) -> f64 {
        let key: Vec<usize> = self.block.iter().map(|&v| s[v]).collect();
        self.states
            .iter()
            .position(|x| *x == key)
            .map_or(0.0, |i| self.probs[i])
    }
}

pub fn conditional_law(
    m: &SpinModel,
    g: &Graph,
    block: &[usize],
    s: &[usize],
    budget: u64,
) -> Result<ConditionalLaw> {
    let (full, weights) = enumerate_block(m, g, block, s, budget)?;
    if full.is_empty() {
        return Err(Error::BoundaryInfeasible);
    }
    let max = weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = weights.iter().map(|&w| (w - max).exp()).collect();
    let z: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= z);
    Ok(ConditionalLaw {
        block: block.to_vec(),
        states: full
            .iter()
            .map(|c| block.iter().map(|&v| c[v]).collect())
            .collect(),
        probs,
    })
}

/// Builds the Glauber transition matrix: `P(σ→σ^{v,x}) = (1/n)·P(x | σ)`,
/// with the self-loop collecting every update that leaves `σ` unchanged.
/// The lazy chain is `(I + P)/2`.
pub fn transition_matrix(chain: &mut ExactChain, m: &SpinModel, g: &Graph, lazy: bool) -> Result<()> {
    let n = g.n();
    let size = chain.len();
    let mut p = DMatrix::zeros(size, size);
    let mut buf = vec![0.0; m.q()];
    for i in 0..size {
        if n == 0 {
            p[(i, i)] = 1.0;
            continue;
        }
        let mut s = chain.states[i].clone();
        for v in 0..n {
            m.local_conditional_into(g, &s, v, &mut buf)?;
            let old = s[v];
            for (x, &px) in buf.iter().enumerate() {
                if px <= 0.0 {
                    continue;
                }
                s[v] = x;
                let j = chain.index[&s];
                p[(i, j)] += px / n as f64;
            }
            s[v] = old;
        }
    }
    if lazy {
        p *= 0.5;
        for i in 0..size {
            p[(i, i)] += 0.5;
        }
    }
    chain.transition = Some(p);
    chain.lazy = lazy;
    Ok(())
}

/// Enumerate and build the transition matrix in one go.
pub fn build_chain(m: &SpinModel, g: &Graph, lazy: bool, budget: u64) -> Result<ExactChain> {
    let mut chain = enumerate(m, g, budget)?;
    transition_matrix(&mut chain, m, g, lazy)?;
    Ok(chain)
}

/// Whether the support of `P` is connected (reversible chains have a
/// symmetric support, so this is irreducibility).
pub fn is_irreducible(p: &DMatrix<f64>) -> bool {
    let size = p.nrows();
    if size == 0 {
        return false;
    }
    let mut seen = vec![false; size];
    seen[0] = true;
    let mut stack = vec![0];
    let mut count = 1;
    while let Some(i) = stack.pop() {
        for j in 0..size {
            if !seen[j] && (p[(i, j)] > 0.0 || p[(j, i)] > 0.0) {
                seen[j] = true;
                count += 1;
                stack.push(j);
            }
        }
    }
    count == size
}

/// Eigenvalues of the π-symmetrized matrix, descending.
pub fn spectrum(p: &DMatrix<f64>, pi: &[f64]) -> Vec<f64> {
    let size = p.nrows();
    let sq: Vec<f64> = pi.iter().map(|x| x.sqrt()).collect();
    let mut s = DMatrix::from_fn(size, size, |i, j| sq[i] * p[(i, j)] / sq[j]);
    let st = s.transpose();
    s += st;
    s *= 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Spectral gap `min(1 − λ₂, 1 − |λ_min|)` of a transition matrix.
pub fn spectral_gap(p: &DMatrix<f64>, pi: &[f64]) -> Result<f64> {
    if p.nrows() == 1 {
        return Ok(1.0);
    }
    if !is_irreducible(p) {
        return Err(Error::DegenerateChain("reducible chain has spectral gap 0".into()));
    }
    let ev = spectrum(p, pi);
    let lambda2 = ev[1];
    let lambda_min = *ev.last().unwrap();
    let gap = (1.0 - lambda2).min(1.0 - lambda_min.abs());
    if gap <= 1e-10 {
        return Err(Error::DegenerateChain(format!("spectral gap {gap:e}")));
    }
    Ok(gap)
}

pub fn relaxation_time(chain: &ExactChain) -> Result<f64> {
    Ok(1.0 / spectral_gap(chain.matrix()?, &chain.stationary)?)
}

/// Worst-start total variation distance of the rows of `m` from `pi`.
pub fn worst_tv(m: &DMatrix<f64>, pi: &[f64]) -> f64 {
    (0..m.nrows())
        .map(|i| 0.5 * (0..m.ncols()).map(|j| (m[(i, j)] - pi[j]).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Smallest `t ≥ 0` with worst-start distance at most `1/(2e)`.
///
/// The worst-start distance is non-increasing in `t`, so the answer is found
/// by squaring `P` until the threshold is met and then descending through
/// the stored powers.
pub fn mixing_time(chain: &ExactChain, horizon: u64) -> Result<u64> {
    let p = chain.matrix()?;
    let pi = &chain.stationary;
    let thr = mixing_threshold();
    let size = p.nrows();
    if worst_tv(&DMatrix::identity(size, size), pi) <= thr {
        return Ok(0);
    }
    if !is_irreducible(p) {
        return Err(Error::DegenerateChain("reducible chain never mixes".into()));
    }
    let mut powers = vec![p.clone()];
    loop {
        let last = powers.last().unwrap();
        if worst_tv(last, pi) <= thr {
            break;
        }
        if (1u64 << (powers.len() - 1)) >= horizon {
            return Err(Error::HorizonExceeded(horizon));
        }
        let sq = last * last;
        powers.push(sq);
    }
    let mut cur = DMatrix::identity(size, size);
    let mut t = 0u64;
    for k in (0..powers.len() - 1).rev() {
        let cand = &cur * &powers[k];
        if worst_tv(&cand, pi) > thr {
            cur = cand;
            t += 1 << k;
        }
    }
    let answer = t + 1;
    if answer > horizon {
        return Err(Error::HorizonExceeded(horizon));
    }
    Ok(answer)
}

/// `τ ≤ τ_mix ≤ τ(1 + ½ ln(1/min π))`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SandwichReport {
    pub tau: f64,
    pub tau_mix: f64,
    pub min_pi: f64,
    pub upper: f64,
    pub lower_pass: bool,
    pub upper_pass: bool,
    /// the chain is reducible, both times are infinite and the inequalities
    /// hold trivially
    pub vacuous: bool,
}

impl SandwichReport {
    pub fn pass(&self) -> bool {
        self.lower_pass && self.upper_pass
    }

    pub fn records(&self, instance: &str, tol: f64) -> Vec<BoundRecord> {
        let mut lower = BoundRecord::upper(instance, "sandwich_lower", self.tau_mix, self.tau, tol);
        let mut upper = BoundRecord::upper(instance, "sandwich_upper", self.upper, self.tau_mix, tol);
        if self.vacuous {
            lower = lower.with_note("reducible chain");
            upper = upper.with_note("reducible chain");
        }
        vec![lower, upper]
    }
}

pub fn sandwich_check(chain: &ExactChain, horizon: u64, tol: f64) -> Result<SandwichReport> {
    let min_pi = chain.min_stationary();
    let p = chain.matrix()?;
    if p.nrows() == 0 || (p.nrows() > 1 && !is_irreducible(p)) {
        return Ok(SandwichReport {
            tau: f64::INFINITY,
            tau_mix: f64::INFINITY,
            min_pi,
            upper: f64::INFINITY,
            lower_pass: true,
            upper_pass: true,
            vacuous: true,
        });
    }
    let tau = relaxation_time(chain)?;
    let tau_mix = mixing_time(chain, horizon)? as f64;
    let upper = tau * (1.0 + 0.5 * (1.0 / min_pi).ln());
    Ok(SandwichReport {
        tau,
        tau_mix,
        min_pi,
        upper,
        lower_pass: tau <= tau_mix + tol,
        upper_pass: tau_mix <= upper + tol,
        vacuous: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheegerReading {
    /// `ε` bounds the ergodic flow between every pair of distinct states;
    /// requires a complete transition graph
    AllPairs,
    /// `ε` is the smallest nonzero ergodic flow between distinct states
    NonzeroPairs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheegerBound {
    pub reading: CheegerReading,
    pub epsilon: f64,
    pub bound: f64,
}

/// `τ_mix ≤ 2/ε²` where `ε = min π(a)P(a→b)` over distinct states.
pub fn cheeger_bound(chain: &ExactChain, reading: CheegerReading) -> Result<CheegerBound> {
    let p = chain.matrix()?;
    let size = p.nrows();
    if size < 2 {
        return Err(Error::HypothesisNotMet("fewer than two states".into()));
    }
    let mut eps = f64::INFINITY;
    for a in 0..size {
        for b in 0..size {
            if a == b {
                continue;
            }
            let flow = chain.stationary[a] * p[(a, b)];
            if flow <= 0.0 {
                if reading == CheegerReading::AllPairs {
                    return Err(Error::HypothesisNotMet(format!(
                        "no transition between states {a} and {b}"
                    )));
                }
                continue;
            }
            eps = eps.min(flow);
        }
    }
    if !eps.is_finite() {
        return Err(Error::HypothesisNotMet("no transitions between distinct states".into()));
    }
    Ok(CheegerBound {
        reading,
        epsilon: eps,
        bound: 2.0 / (eps * eps),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CanonicalPathReport {
    pub length: usize,
    pub congestion: f64,
    pub bound: f64,
    pub tau: f64,
    pub pass: bool,
}

/// Canonical paths for the hardcore model on the lazy chain: from `σ`,
/// empty the occupied vertices of `σ` in vertex order, then fill those of
/// `η` in vertex order. Returns `L`, the congestion
/// `ρ = max_e Σ_{paths through e} π(σ)π(η) / (π(η′)P(η′→η″))` and `Lρ`
/// alongside the exact `τ`.
pub fn canonical_path_bound(m: &SpinModel, g: &Graph, budget: u64) -> Result<CanonicalPathReport> {
    if m.kind() != crate::model::ModelKind::Hardcore {
        return Err(Error::invalid("canonical paths are defined for the hardcore model"));
    }
    let chain = build_chain(m, g, true, budget)?;
    let p = chain.matrix()?;
    let pi = &chain.stationary;
    let mut load: HashMap<(usize, usize), f64> = HashMap::new();
    let mut length = 0;
    for (i, sigma) in chain.states.iter().enumerate() {
        for (j, eta) in chain.states.iter().enumerate() {
            let mass = pi[i] * pi[j];
            let mut cur = sigma.clone();
            let mut at = i;
            let mut steps = 0;
            let targets = (0..g.n())
                .filter(|&v| sigma[v] == 1)
                .map(|v| (v, 0))
                .chain((0..g.n()).filter(|&v| eta[v] == 1).map(|v| (v, 1)));
            for (v, x) in targets {
                cur[v] = x;
                let next = chain.index[&cur];
                *load.entry((at, next)).or_default() += mass;
                at = next;
                steps += 1;
            }
            length = length.max(steps);
        }
    }
    let mut congestion: f64 = 0.0;
    for (&(a, b), &l) in &load {
        let q = pi[a] * p[(a, b)];
        congestion = congestion.max(l / q);
    }
    let tau = relaxation_time(&chain)?;
    let bound = length as f64 * congestion;
    Ok(CanonicalPathReport {
        length,
        congestion,
        bound,
        tau,
        pass: tau <= bound + 1e-9,
    })
}

/// `2 Σ π(σ) f̄(σ)² / Σ_{σ≠τ} π(σ)P(σ→τ)(f(σ) − f(τ))²` with `f̄ = f − E_π f`.
/// For every non-constant `f` this is at most `τ`.
pub fn rayleigh_ratio(chain: &ExactChain, f: &[f64]) -> Result<f64> {
    let p = chain.matrix()?;
    let pi = &chain.stationary;
    if f.len() != pi.len() {
        return Err(Error::invalid("test function has the wrong length"));
    }
    let mean: f64 = f.iter().zip(pi).map(|(a, b)| a * b).sum();
    let var: f64 = f.iter().zip(pi).map(|(a, b)| b * (a - mean).powi(2)).sum();
    let mut dirichlet = 0.0;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            if i != j {
                dirichlet += pi[i] * p[(i, j)] * (f[i] - f[j]).powi(2);
            }
        }
    }
    if dirichlet == 0.0 {
        return Err(Error::invalid("test function has zero Dirichlet form"));
    }
    Ok(2.0 * var / dirichlet)
}

/// Largest `|π(σ)P(σ,τ) − π(τ)P(τ,σ)|`.
pub fn detailed_balance_defect(chain: &ExactChain) -> Result<f64> {
    let p = chain.matrix()?;
    let pi = &chain.stationary;
    let mut worst: f64 = 0.0;
    for i in 0..p.nrows() {
        for j in i + 1..p.ncols() {
            worst = worst.max((pi[i] * p[(i, j)] - pi[j] * p[(j, i)]).abs());
        }
    }
    Ok(worst)
}

/// Largest `|Σ_τ P(σ,τ) − 1|`.
pub fn row_sum_defect(chain: &ExactChain) -> Result<f64> {
    let p = chain.matrix()?;
    Ok((0..p.nrows())
        .map(|i| (p.row(i).sum() - 1.0).abs())
        .fold(0.0, f64::max))
}

/// Exact detailed balance for models whose weights are all 0 or 1, where
/// `π` is uniform on feasible states and every conditional is uniform on
/// its support. Transition probabilities are rebuilt from allowed-state
/// counts in rational arithmetic, independently of the floating matrix.
pub fn detailed_balance_rational(chain: &ExactChain, m: &SpinModel, g: &Graph) -> Result<bool> {
    if !m.has_unit_weights() {
        return Err(Error::invalid("rational check needs 0/1 weights"));
    }
    if chain.is_empty() {
        return Ok(true);
    }
    type Q = Ratio<i128>;
    let size = chain.len() as i128;
    let n = g.n() as i128;
    let pi = Q::new(1, size);
    let lazy = chain.lazy;
    let allowed = |s: &[usize], v: usize| -> Vec<usize> {
        (0..m.q())
            .filter(|&x| {
                m.h(x) == 0.0 && g.neighbors(v).iter().all(|&w| m.g(s[w], x) == 0.0)
            })
            .collect()
    };
    let mut rows: Vec<HashMap<usize, Q>> = Vec::with_capacity(chain.len());
    for s in &chain.states {
        let mut row: HashMap<usize, Q> = HashMap::new();
        let mut t = s.clone();
        for v in 0..g.n() {
            let opts = allowed(s, v);
            let k = opts.len() as i128;
            for x in opts {
                t[v] = x;
                let j = chain.index[&t];
                *row.entry(j).or_insert_with(|| Q::from_integer(0)) += Q::new(1, n * k);
            }
            t[v] = s[v];
        }
        if lazy {
            for val in row.values_mut() {
                *val /= 2;
            }
            let i = chain.index[s];
            *row.entry(i).or_insert_with(|| Q::from_integer(0)) += Q::new(1, 2);
        }
        let total: Q = row.values().sum();
        if total != Q::from_integer(1) {
            return Ok(false);
        }
        rows.push(row);
    }
    for (i, row) in rows.iter().enumerate() {
        for (&j, &pij) in row {
            let pji = rows[j].get(&i).copied().unwrap_or_else(|| Q::from_integer(0));
            if pi * pij != pi * pji {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Plain-text dump: a header line `states <N> vertices <n>`, one line per
/// state with its configuration and `π`, then the `N` rows of `P`.
pub fn dump_chain(chain: &ExactChain) -> String {
    let mut out = format!("states {} vertices {}\n", chain.len(), chain.n);
    for (s, p) in chain.states.iter().zip(&chain.stationary) {
        let cfg: Vec<String> = s.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "{} {:.17e}", cfg.join(","), p);
    }
    if let Some(p) = &chain.transition {
        for i in 0..p.nrows() {
            let row: Vec<String> = p.row(i).iter().map(|x| format!("{x:.17e}")).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    out
}


#[cfg(test)]
mod tests;
