//! Named verification suites over built-in instance families.
//!
//! Each suite implements [`Suite`] and is looked up by name in a
//! [`SuiteRegistry`]. The default registry holds
//!
//! | name                | checks                                                  |
//! |---------------------|---------------------------------------------------------|
//! | `detailed-balance`  | reversibility and row sums of every zoo chain           |
//! | `sandwich`          | `τ ≤ τ_mix ≤ τ(1 + ½ ln(1/min π))` on the zoo           |
//! | `cheeger`           | `τ_mix ≤ 2/ε²` under both readings of the hypothesis    |
//! | `canonical`         | hardcore canonical paths `τ ≤ Lρ`                       |
//! | `decay`             | tree correlation decay against `ψ_λ`                    |
//! | `skeleton-joint`    | skeleton-then-trees law equals the block conditional    |
//! | `block-composition` | `τ ≤ τ_block · max τ_i` on partitioned instances        |
//! | `contraction`       | one-step path coupling on regular graphs, `q = 2Δ + 2`  |
//!
//! The zoo is every connected graph on at most five vertices crossed with
//! coloring `q ∈ {3, 4}`, hardcore `β ∈ {0, 0.5, 1}` and a random soft
//! model with `‖H‖ ≤ 0.5`.

mod suites;
pub mod zoo;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::report::BoundRecord;
use crate::{Error, Result};

pub use suites::{
    BlockCompositionSuite, CanonicalSuite, CheegerSuite, ContractionSuite, DecaySuite,
    DetailedBalanceSuite, SandwichSuite, SkeletonJointSuite,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteContext {
    pub budget: u64,
    pub horizon: u64,
    pub seed: u64,
    /// keep only instances whose name contains this string
    pub filter: Option<String>,
}

impl Default for SuiteContext {
    fn default() -> Self {
        Self {
            budget: crate::exact::DEFAULT_STATE_BUDGET,
            horizon: crate::exact::DEFAULT_HORIZON,
            seed: 0,
            filter: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub instances: usize,
    pub records: Vec<BoundRecord>,
    /// instances abandoned on budget or horizon exhaustion, with the reason
    pub skipped: Vec<(String, String)>,
}

impl SuiteOutcome {
    /// No failed record; skipped instances do not count as failures.
    pub fn pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BoundRecord> {
        self.records.iter().filter(|r| !r.pass)
    }
}

pub trait Suite: Send + Sync {
    fn name(&self) -> &str;
    fn run(&self, ctx: &SuiteContext) -> Result<SuiteOutcome>;
}

pub struct SuiteRegistry {
    suites: BTreeMap<String, Box<dyn Suite>>,
}

impl SuiteRegistry {
    pub fn empty() -> Self {
        Self {
            suites: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, suite: Box<dyn Suite>) {
        self.suites.insert(suite.name().to_string(), suite);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Suite> {
        self.suites
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::invalid(format!("unknown suite {name:?}")))
    }

    pub fn names(&self) -> Vec<&str> {
        self.suites.keys().map(String::as_str).collect()
    }
}

impl Default for SuiteRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(DetailedBalanceSuite::default()));
        r.register(Box::new(SandwichSuite::default()));
        r.register(Box::new(CheegerSuite::default()));
        r.register(Box::new(CanonicalSuite::default()));
        r.register(Box::new(DecaySuite::default()));
        r.register(Box::new(SkeletonJointSuite));
        r.register(Box::new(BlockCompositionSuite));
        r.register(Box::new(ContractionSuite::default()));
        r
    }
}
