//! Run configuration file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ablate::AblationSpec;
use super::eval::SuccessCriterion;
use super::grid::GridSpec;
use super::rollout::RolloutSpec;
use crate::control::{DeployScenario, EnergyShapingGains};
use crate::dynamics::BlimpParams;
use crate::env::EnvConfig;
use crate::td3::Td3Hyper;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Blimp parameter file; the bundled defaults when absent. Relative
    /// paths resolve against the config file's directory.
    pub params: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// Episodes between checkpoints; 0 keeps only the final one.
    pub checkpoint_every: usize,
    pub env: EnvConfig,
    pub td3: Td3Hyper,
    pub success: SuccessCriterion,
    /// Baseline gains, tuned on the default parameter file.
    pub baseline: EnergyShapingGains,
    pub grid: GridSpec,
    pub ablation: AblationSpec,
    pub deploy: DeployScenario,
    pub rollout: RolloutSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: None,
            seed: None,
            out: None,
            checkpoint_every: 100,
            env: EnvConfig::default(),
            td3: Td3Hyper::default(),
            success: SuccessCriterion::default(),
            baseline: EnergyShapingGains::default(),
            grid: GridSpec::default(),
            ablation: AblationSpec::default(),
            deploy: DeployScenario::default(),
            rollout: RolloutSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let c: Self = toml::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut c: Self = toml::from_str(&text)?;
        if let (Some(p), Some(dir)) = (&c.params, path.parent()) {
            if p.is_relative() {
                c.params = Some(dir.join(p));
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(p) = &self.params {
            if !p.is_file() {
                return Err(Error::invalid(format!("params file {} does not exist", p.display())));
            }
        }
        self.env.validate()?;
        self.td3.validate()?;
        self.success.validate()?;
        self.baseline.validate()?;
        self.grid.validate()?;
        self.ablation.validate()?;
        self.deploy.validate()
    }

    pub fn blimp_params(&self) -> Result<BlimpParams> {
        match &self.params {
            Some(p) => BlimpParams::load(p),
            None => Ok(BlimpParams::default()),
        }
    }

    /// Environment used for evaluation: runs the full horizon.
    pub fn eval_env(&self) -> EnvConfig {
        EnvConfig {
            terminate_over_range: false,
            episode_time: self.success.horizon.max(self.env.episode_time),
            ..self.env.clone()
        }
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::invalid("a seed is required (config `seed` or --seed)"))
    }
}
