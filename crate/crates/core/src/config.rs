//! Run configuration: the JSON document driving the CLI.

use crate::error::{Error, Result};
use crate::lattice::{LatticeDescriptor, LatticeGraph, LatticeKind, RegionKind};
use crate::noise::ScenarioConfig;
use crate::oracle::MAX_DENSE_QUBITS;
use crate::sampler::MeasurementSetting;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineKind {
    Sampled,
    AnalyticExact,
    AnalyticPaper,
    Oracle,
}

impl std::str::FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<EngineKind> {
        match s {
            "sampled" => Ok(EngineKind::Sampled),
            "analytic-exact" => Ok(EngineKind::AnalyticExact),
            "analytic-paper" => Ok(EngineKind::AnalyticPaper),
            "oracle" => Ok(EngineKind::Oracle),
            other => Err(Error::InvalidConfig(format!("unknown engine {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub lattice: LatticeDescriptor,
    #[serde(default)]
    pub noise: ScenarioConfig,
    /// Settings to sample; defaults to S_A/S_B for graph lattices and the
    /// three dimer settings for pairs.
    #[serde(default)]
    pub settings: Vec<MeasurementSetting>,
    #[serde(default = "default_shots")]
    pub n_shots: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_regions")]
    pub regions: Vec<RegionKind>,
    #[serde(default = "default_engine")]
    pub engine: EngineKind,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_shots() -> u64 {
    10_000
}

fn default_regions() -> Vec<RegionKind> {
    vec![RegionKind::Alpha, RegionKind::Beta, RegionKind::Gamma]
}

fn default_engine() -> EngineKind {
    EngineKind::Sampled
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_shots == 0 {
            return Err(Error::InvalidConfig("n_shots must be at least 1".into()));
        }
        let sites = 2 * self.lattice.n_u as usize * self.lattice.n_v as usize;
        if self.engine == EngineKind::Oracle && sites > MAX_DENSE_QUBITS {
            return Err(Error::InvalidConfig(format!(
                "oracle engine requires at most {MAX_DENSE_QUBITS} sites, lattice has {sites}"
            )));
        }
        for s in &self.settings {
            let pair_lattice = self.lattice.kind == LatticeKind::Pairs;
            if s.is_pair_setting() != pair_lattice {
                return Err(Error::InvalidConfig(format!(
                    "setting {s} does not fit a {} lattice",
                    self.lattice.kind
                )));
            }
        }
        Ok(())
    }

    pub fn build_graph(&self) -> Result<LatticeGraph> {
        LatticeGraph::from_descriptor(&self.lattice)
    }

    /// Settings to sample, falling back to the kind's defaults.
    pub fn effective_settings(&self) -> Vec<MeasurementSetting> {
        if !self.settings.is_empty() {
            return self.settings.clone();
        }
        match self.lattice.kind {
            LatticeKind::Pairs => vec![
                MeasurementSetting::PairXX,
                MeasurementSetting::PairYZ,
                MeasurementSetting::PairZY,
            ],
            _ => vec![MeasurementSetting::SA, MeasurementSetting::SB],
        }
    }

    /// Region kinds that exist on this lattice (gamma only on honeycomb).
    pub fn effective_regions(&self) -> Vec<RegionKind> {
        self.regions
            .iter()
            .copied()
            .filter(|k| *k != RegionKind::Gamma || self.lattice.kind == LatticeKind::Honeycomb)
            .collect()
    }

    /// Shot file path of one setting under the output directory.
    pub fn shot_file(&self, setting: MeasurementSetting) -> PathBuf {
        self.output_dir
            .join(format!("shots_{}.bin", setting.label()))
    }
}
