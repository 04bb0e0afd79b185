use std::path::{Path, PathBuf};

use dyadnet::mcmc::McmcConfig;
use dyadnet::srm::SrmSpec;
use dyadnet::synth::SyntheticTruth;
use dyadnet::two_stage::QualityModelSpec;
use dyadnet::{Error, Result};
use serde::{Deserialize, Serialize};

/// Batch configuration. Relative paths resolve against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub nodes: Option<PathBuf>,
    #[serde(default)]
    pub dyads: Option<PathBuf>,
    #[serde(default)]
    pub edges: Option<PathBuf>,
    /// Square travel-time matrix used for the proximity covariates.
    #[serde(default)]
    pub travel_times: Option<PathBuf>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Mandatory; all randomness derives from it.
    pub seed: u64,
    #[serde(default)]
    pub srm: SrmSpec,
    #[serde(default)]
    pub quality: QualityModelSpec,
    #[serde(default)]
    pub mcmc: McmcConfig,
    /// When set, DC and BW are recomputed from travel times at this threshold.
    #[serde(default)]
    pub geo_threshold: Option<f64>,
    #[serde(default)]
    pub robustness_thresholds: Vec<f64>,
    #[serde(default)]
    pub truth: Option<SyntheticTruth>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    /// Also run the quality-model recovery in `recovery`.
    #[serde(default)]
    pub recovery_stage2: bool,
}

fn default_replicates() -> usize {
    20
}

impl PipelineConfig {
    /// Parses the file and resolves relative paths.
    pub fn load(path: &Path) -> Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut cfg: Self = serde_json::from_slice(&bytes).map_err(|e| {
            Error::config(format!("{}:{}: {e}", path.display(), e.line()))
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut cfg.nodes,
            &mut cfg.dyads,
            &mut cfg.edges,
            &mut cfg.travel_times,
            &mut cfg.out,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok((cfg, bytes))
    }

    pub fn require<'a>(&self, field: &'a Option<PathBuf>, name: &str) -> Result<&'a Path> {
        field
            .as_deref()
            .ok_or_else(|| Error::config(format!("config is missing '{name}'")))
    }

    /// The MCMC settings with the run seed applied.
    pub fn mcmc_config(&self) -> McmcConfig {
        self.mcmc.clone().with_seed(self.seed)
    }

    pub fn truth(&self) -> SyntheticTruth {
        self.truth
            .clone()
            .unwrap_or_default()
            .with_seed(self.seed)
    }
}
