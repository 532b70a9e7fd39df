//! Run configuration: a TOML file, then command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cse_core::optim::OptimizerOptions;
use cse_core::scf::ScfOptions;
use serde::{Deserialize, Serialize};

/// Bond lengths of the H4 tables, in Å.
pub const TABLE_DISTANCES: [f64; 6] = [0.6, 1.0, 1.4, 1.8, 2.2, 2.6];

/// Excited states are reported at this H4 bond length by default.
pub const EXCITED_DISTANCE: f64 = 1.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub chain: Option<usize>,
    pub r: Option<Vec<f64>>,
    pub basis: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CseConfig {
    pub depths: Vec<usize>,
    pub seed: u64,
    pub homotopy_steps: usize,
}

impl Default for CseConfig {
    fn default() -> Self {
        Self {
            depths: vec![1, 2],
            seed: 1,
            homotopy_steps: 5,
        }
    }
}

/// Unset fields fall back on chain parity: H4-style searches skip the ground state
/// and use 2M_S = 0, 2, 4; odd chains take the two lowest doublets.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExcitedConfig {
    pub first_index: Option<usize>,
    pub count: Option<usize>,
    pub multiplicity: Option<u32>,
    pub sectors: Option<Vec<i32>>,
    pub depth: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub format: Option<Format>,
    pub path: Option<PathBuf>,
    /// cse-scan only: potential energy curves as CSV.
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub cse: CseConfig,
    pub optimizer: OptimizerOptions,
    pub scf: ScfOptions,
    pub excited: ExcitedConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn chain(&self) -> usize {
        self.geometry.chain.unwrap_or(4)
    }

    pub fn format(&self) -> Format {
        self.output.format.unwrap_or(Format::Json)
    }

    pub fn validate(&self) -> Result<()> {
        let chain = self.chain();
        if !(2..=5).contains(&chain) {
            bail!("chain length {chain} is outside the supported range 2..=5");
        }
        if let Some(rs) = &self.geometry.r {
            if let Some(r) = rs.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
                bail!("bond length {r} must be positive");
            }
        }
        if self.cse.depths.is_empty() || self.cse.depths.contains(&0) {
            bail!("CSE depths must be a non-empty list of positive integers");
        }
        if self.cse.homotopy_steps == 0 {
            bail!("homotopy_steps must be at least 1");
        }
        if self.excited.depth == Some(0) {
            bail!("excited depth must be positive");
        }
        self.optimizer.validate().map_err(anyhow::Error::from)?;
        Ok(())
    }
}

/// Comma-separated bond lengths; an empty string is an empty list.
pub fn parse_distances(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().with_context(|| format!("bad bond length {s:?}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distances_parse() {
        assert_eq!(parse_distances("0.6, 1.0,1.4").unwrap(), vec![0.6, 1.0, 1.4]);
        assert!(parse_distances("").unwrap().is_empty());
        assert!(parse_distances("1.0,x").is_err());
    }

    #[test]
    fn example_config_parses() {
        let text = include_str!("../examples/h4.toml");
        let cfg: RunConfig = toml::from_str(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.geometry.r.as_deref(), Some(&TABLE_DISTANCES[..]));
        assert_eq!(cfg.excited.sectors, Some(vec![0, 2, 4]));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(toml::from_str::<RunConfig>("[cse]\ndepth = 2\n").is_err());
    }

    #[test]
    fn non_positive_distance_is_rejected() {
        let mut cfg = RunConfig::default();
        cfg.geometry.r = Some(vec![1.0, -0.5]);
        assert!(cfg.validate().is_err());
    }
}
