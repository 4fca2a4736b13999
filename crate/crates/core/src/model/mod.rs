//! Spin systems on graphs.
//!
//! A model is a Hamiltonian
//!
//! ```text
//! H(σ) = Σ_u h(σ(u)) + Σ_{(u,v)∈E} g(σ(u), σ(v))
//! ```
//!
//! over a finite state set `C = {0, …, q−1}`, with Gibbs law `P(σ) ∝ exp H(σ)`.
//! Hard constraints are encoded by `g = −∞`. Three families are provided:
//! proper `q`-colorings, the hardcore model with fugacity parameter `β`, and
//! soft models with arbitrary finite symmetric `g`.

mod init;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::{Error, Result};

pub use init::{auto_degree_cap, greedy_coloring, initial_configuration};

/// A spin assignment, one state index per vertex.
pub type Configuration = Vec<usize>;

/// A real number or `−∞`. `−∞ + x = −∞` and `exp(−∞) = 0`; `+∞` and NaN
/// are never produced.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ExtReal(f64);

impl ExtReal {
    pub const NEG_INF: ExtReal = ExtReal(f64::NEG_INFINITY);

    pub fn finite(x: f64) -> Result<Self> {
        if x.is_finite() {
            Ok(ExtReal(x))
        } else {
            Err(Error::invalid(format!("{x} is not finite")))
        }
    }

    pub fn is_neg_inf(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn exp(self) -> f64 {
        if self.is_neg_inf() {
            0.0
        } else {
            self.0.exp()
        }
    }
}

impl std::ops::Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        if self.is_neg_inf() || rhs.is_neg_inf() {
            ExtReal::NEG_INF
        } else {
            ExtReal(self.0 + rhs.0)
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_neg_inf() {
            f.write_str("-inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_neg_inf() {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) if x.is_finite() => Ok(ExtReal(x)),
            Raw::Str(s) if s == "-inf" => Ok(ExtReal::NEG_INF),
            _ => Err(serde::de::Error::custom("expected a finite number or \"-inf\"")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Coloring,
    Hardcore,
    Soft,
}

/// `‖H‖` over finite entries; `hard_constrained` records that `−∞` entries
/// of `g` were left out of the maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelNorm {
    pub value: f64,
    pub hard_constrained: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinModel {
    kind: ModelKind,
    q: usize,
    beta: Option<f64>,
    h: Vec<f64>,
    // row-major q×q, −∞ for forbidden pairs
    g: Vec<f64>,
}

impl SpinModel {
    pub fn coloring(q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::invalid("coloring needs q >= 1"));
        }
        let mut g = vec![0.0; q * q];
        for x in 0..q {
            g[x * q + x] = f64::NEG_INFINITY;
        }
        Ok(Self {
            kind: ModelKind::Coloring,
            q,
            beta: None,
            h: vec![0.0; q],
            g,
        })
    }

    /// Hardcore model on `C = {0,1}` with `h(x) = βx` and `g(1,1) = −∞`.
    pub fn hardcore(beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::invalid("beta must be finite"));
        }
        Ok(Self {
            kind: ModelKind::Hardcore,
            q: 2,
            beta: Some(beta),
            h: vec![0.0, beta],
            g: vec![0.0, 0.0, 0.0, f64::NEG_INFINITY],
        })
    }

    /// Soft-constraint model with finite activity `h` and finite symmetric `g`.
    pub fn soft(h: Vec<f64>, g: Vec<Vec<f64>>) -> Result<Self> {
        let q = h.len();
        if q == 0 {
            return Err(Error::invalid("soft model needs at least one state"));
        }
        if g.len() != q || g.iter().any(|row| row.len() != q) {
            return Err(Error::invalid("interaction must be q×q"));
        }
        if h.iter().chain(g.iter().flatten()).any(|x| !x.is_finite()) {
            return Err(Error::invalid("soft model entries must be finite"));
        }
        for x in 0..q {
            for y in 0..x {
                if g[x][y] != g[y][x] {
                    return Err(Error::invalid(format!("interaction not symmetric at ({x},{y})")));
                }
            }
        }
        Ok(Self {
            kind: ModelKind::Soft,
            q,
            beta: None,
            h,
            g: g.into_iter().flatten().collect(),
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    pub fn h(&self, x: usize) -> f64 {
        self.h[x]
    }

    pub fn g(&self, x: usize, y: usize) -> f64 {
        self.g[x * self.q + y]
    }

    /// Whether every weight `exp(h)`, `exp(g)` is rational (all entries are 0
    /// or −∞), so exact rational arithmetic applies.
    pub fn has_unit_weights(&self) -> bool {
        self.h.iter().chain(&self.g).all(|&x| x == 0.0 || x == f64::NEG_INFINITY)
    }

    pub fn log_weight(&self, graph: &Graph, s: &[usize]) -> ExtReal {
        let mut total = 0.0;
        for &x in s {
            total += self.h[x];
        }
        for (u, v) in graph.edges() {
            let w = self.g(s[u], s[v]);
            if w == f64::NEG_INFINITY {
                return ExtReal::NEG_INF;
            }
            total += w;
        }
        ExtReal(total)
    }

    pub fn is_feasible(&self, graph: &Graph, s: &[usize]) -> bool {
        !self.log_weight(graph, s).is_neg_inf()
    }

    /// Checks length and state range.
    pub fn validate_configuration(&self, graph: &Graph, s: &[usize]) -> Result<()> {
        if s.len() != graph.n() {
            return Err(Error::invalid(format!(
                "configuration has {} entries for {} vertices",
                s.len(),
                graph.n()
            )));
        }
        if let Some((v, &x)) = s.iter().enumerate().find(|&(_, &x)| x >= self.q) {
            return Err(Error::invalid(format!("state {x} at vertex {v} outside 0..{}", self.q)));
        }
        Ok(())
    }

    /// Conditional law of `σ(v)` given the rest of `s`.
    pub fn local_conditional(&self, graph: &Graph, s: &[usize], v: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.q];
        self.local_conditional_into(graph, s, v, &mut out)?;
        Ok(out)
    }

    /// Allocation-free form of [`SpinModel::local_conditional`]; `out` must
    /// have length `q`. Log-weights are shifted by their maximum before
    /// exponentiation.
    pub fn local_conditional_into(
        &self,
        graph: &Graph,
        s: &[usize],
        v: usize,
        out: &mut [f64],
    ) -> Result<()> {
        match self.kind {
            ModelKind::Coloring => {
                out.fill(1.0);
                for &w in graph.neighbors(v) {
                    out[s[w]] = 0.0;
                }
                let k = out.iter().filter(|&&p| p > 0.0).count();
                if k == 0 {
                    return Err(Error::NoFeasibleState { vertex: v });
                }
                let p = 1.0 / k as f64;
                out.iter_mut().filter(|p| **p > 0.0).for_each(|x| *x = p);
                Ok(())
            }
            ModelKind::Hardcore => {
                if graph.neighbors(v).iter().any(|&w| s[w] == 1) {
                    out[0] = 1.0;
                    out[1] = 0.0;
                } else {
                    let b = self.h[1];
                    // e^β/(1+e^β) written to avoid overflow at large |β|
                    let p1 = if b >= 0.0 {
                        1.0 / (1.0 + (-b).exp())
                    } else {
                        b.exp() / (1.0 + b.exp())
                    };
                    out[1] = p1;
                    out[0] = 1.0 - p1;
                }
                Ok(())
            }
            ModelKind::Soft => {
                out.copy_from_slice(&self.h);
                for &w in graph.neighbors(v) {
                    let row = &self.g[s[w] * self.q..(s[w] + 1) * self.q];
                    for (o, &gx) in out.iter_mut().zip(row) {
                        *o += gx;
                    }
                }
                normalize_log(out);
                Ok(())
            }
        }
    }

    /// `P̂`: the same model with `h ≡ 0`.
    pub fn activity_free(&self) -> Self {
        let mut m = self.clone();
        m.h.fill(0.0);
        if m.beta.is_some() {
            m.beta = Some(0.0);
        }
        m
    }

    pub fn model_norm(&self) -> ModelNorm {
        let hmax = self.h.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        let gmax = self
            .g
            .iter()
            .filter(|x| x.is_finite())
            .fold(0.0f64, |a, &x| a.max(x.abs()));
        ModelNorm {
            value: hmax.max(gmax),
            hard_constrained: self.g.iter().any(|x| !x.is_finite()),
        }
    }

    pub fn to_spec(&self) -> ModelSpec {
        ModelSpec {
            kind: self.kind,
            q: Some(self.q),
            beta: self.beta,
            h: Some(self.h.iter().map(|&x| ExtReal(x)).collect()),
            g: Some(
                self.g
                    .chunks(self.q)
                    .map(|row| row.iter().map(|&x| ExtReal(x)).collect())
                    .collect(),
            ),
        }
    }

    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        match spec.kind {
            ModelKind::Coloring => {
                let q = spec.q.ok_or_else(|| Error::invalid("coloring spec needs q"))?;
                Self::coloring(q)
            }
            ModelKind::Hardcore => {
                let beta = spec.beta.ok_or_else(|| Error::invalid("hardcore spec needs beta"))?;
                Self::hardcore(beta)
            }
            ModelKind::Soft => {
                let h = spec.h.as_ref().ok_or_else(|| Error::invalid("soft spec needs h"))?;
                let g = spec.g.as_ref().ok_or_else(|| Error::invalid("soft spec needs g"))?;
                if let Some(q) = spec.q {
                    if q != h.len() {
                        return Err(Error::invalid("q disagrees with length of h"));
                    }
                }
                let g = g.iter().map(|r| r.iter().map(|x| x.get()).collect()).collect();
                Self::soft(h.iter().map(|x| x.get()).collect(), g)
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_spec(&serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_spec()).expect("model spec serializes")
    }
}

/// Model file contents: `{"kind", "q", "beta", "h", "g"}` with `"-inf"`
/// for forbidden interactions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<ExtReal>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<Vec<ExtReal>>>,
}

/// In-place softmax of log-weights. `−∞` entries map to 0.
pub(crate) fn normalize_log(xs: &mut [f64]) {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for x in xs.iter_mut() {
        *x = if *x == f64::NEG_INFINITY { 0.0 } else { (*x - max).exp() };
        total += *x;
    }
    for x in xs.iter_mut() {
        *x /= total;
    }
}

pub fn write_configuration(s: &[usize]) -> String {
    let mut out = s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    out.push('\n');
    out
}

pub fn parse_configuration(text: &str) -> Result<Configuration> {
    let line = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .unwrap_or("");
    line.split_whitespace()
        .map(|tok| {
            tok.parse().map_err(|e| Error::Parse {
                line: 1,
                message: format!("{tok:?}: {e}"),
            })
        })
        .collect()
}

pub fn read_configuration(path: impl AsRef<Path>) -> Result<Configuration> {
    parse_configuration(&std::fs::read_to_string(path)?)
}
