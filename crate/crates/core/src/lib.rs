//! Gibbs sampling on sparse graphs.
//!
//! The crate is organised around the pieces needed to study single-site
//! (Glauber) and block dynamics for colorings, the hardcore model and
//! soft-constraint spin systems on Erdős–Rényi-like graphs:
//!
//! - [`graph`]: adjacency structure, G(n, p) generation, balls, tree excess,
//!   α-weights, maximal path weights and the local-sparsity hypothesis check.
//! - [`model`]: spin models, configurations, conditional laws and initial
//!   feasible configurations.
//! - [`dynamics`]: Glauber steps, exact tree-block samplers, block dynamics,
//!   maximal couplings and coalescence experiments. Update rules are trait
//!   objects selected by name through [`dynamics::DynamicsRegistry`].
//! - [`decomposition`]: good/bad vertex classification, skeleton
//!   construction and block partitions with structural validation.
//! - [`exact`]: brute-force state enumeration, transition matrices,
//!   relaxation and mixing times and the bounds checked against them.
//! - [`verify`]: named verification suites over a built-in instance zoo,
//!   registered in [`verify::SuiteRegistry`].
//! - [`experiments`]: multi-seed pipelines such as the coalescence scaling
//!   table.

pub mod decomposition;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod graph;
pub mod model;
pub mod report;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{Graph, LogBase, VertexSet};
pub use model::{Configuration, ExtReal, ModelKind, SpinModel};
