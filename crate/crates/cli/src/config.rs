use std::path::Path;

use anyhow::{Context, Result};
use serde::Deserialize;

const DEFAULTS: &str = include_str!("../defaults.toml");

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub log_base: String,
    pub format: String,
    pub gen: GenConfig,
    pub check: CheckConfig,
    pub decompose: DecomposeConfig,
    pub sample: SampleConfig,
    pub exact: ExactConfig,
    pub verify: VerifyConfig,
    pub scaling: ScalingConfig,
    pub couple: CoupleConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenConfig {
    pub n: usize,
    pub d: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub budget: u64,
    pub a: f64,
    pub alpha: f64,
    pub t: u32,
    pub delta: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeConfig {
    pub budget: u64,
    pub order: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub steps: u64,
    pub stride: u64,
    pub dynamics: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactConfig {
    pub budget: u64,
    pub horizon: u64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub budget: u64,
    pub horizon: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub horizon: u64,
    pub d: f64,
    pub model: String,
    pub ns: Vec<usize>,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoupleConfig {
    pub pairs: usize,
    pub horizon: u64,
    pub budget: u64,
}

pub fn defaults_text() -> &'static str {
    DEFAULTS
}

/// Built-in defaults, with `path` (if any) merged key by key on top.
pub fn load(path: Option<&Path>) -> Result<Config> {
    let mut base: toml::Table = toml::from_str(DEFAULTS).context("built-in defaults")?;
    if let Some(path) = path {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let overlay: toml::Table =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        merge(&mut base, overlay);
    }
    toml::Value::Table(base)
        .try_into()
        .context("config does not match the documented keys")
}

fn merge(base: &mut toml::Table, overlay: toml::Table) {
    for (k, v) in overlay {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse() {
        let c = load(None).unwrap();
        assert_eq!(c.scaling.horizon, 100_000_000);
        assert_eq!(c.scaling.ns, vec![250, 500, 1000, 2000]);
    }

    #[test]
    fn overlay_replaces_single_keys() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "seed = 9\n[exact]\nhorizon = 5\n").unwrap();
        let c = load(Some(&p)).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.exact.horizon, 5);
        assert_eq!(c.exact.budget, 1_000_000);
    }

    #[test]
    fn unknown_key_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "[exact]\nhorizn = 5\n").unwrap();
        assert!(load(Some(&p)).is_err());
    }
}
