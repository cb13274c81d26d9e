//! Single-episode rollouts written in the step CSV schema.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::eval::{rollout, Verdict};
use super::grid::GridCell;
use crate::control::{Controller, EnergyShaping, Passive, PdStabilizer, PolicyController};
use crate::env::{InvertEnv, StepRecord, StepWriter};
use crate::td3::Mlp;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RolloutController {
    Policy,
    Baseline,
    /// The deployment PD alone.
    Pd,
    Passive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RolloutSpec {
    pub controller: RolloutController,
    pub cell: GridCell,
    pub yaw: f64,
    /// Seconds; the success horizon when absent.
    pub duration: Option<f64>,
}

impl Default for RolloutSpec {
    fn default() -> Self {
        Self {
            controller: RolloutController::Policy,
            cell: GridCell::NOMINAL,
            yaw: 0.0,
            duration: None,
        }
    }
}

/// Runs the configured rollout; `actor` is required for the policy.
pub fn run_rollout(cfg: &RunConfig, actor: Option<&Mlp<f32>>) -> Result<(Vec<StepRecord>, Verdict)> {
    let spec = &cfg.rollout;
    let base = cfg.blimp_params()?;
    let plant = spec.cell.apply(&base)?;
    let mut env = InvertEnv::new(base.clone(), cfg.eval_env())?;
    let mut c: Box<dyn Controller> = match spec.controller {
        RolloutController::Policy => {
            let a = actor.ok_or_else(|| Error::invalid("policy rollout needs --checkpoint"))?;
            Box::new(PolicyController::new(a.clone()))
        }
        RolloutController::Baseline => Box::new(EnergyShaping::new(&base, cfg.baseline.clone(), env.torque_scale())?),
        RolloutController::Pd => Box::new(PdStabilizer::new(cfg.deploy.pd.clone(), env.torque_scale())?),
        RolloutController::Passive => Box::new(Passive),
    };
    let duration = spec.duration.unwrap_or(cfg.success.horizon);
    let records = rollout(&mut env, c.as_mut(), plant, spec.yaw, duration)?;
    let verdict = cfg.success.judge_records(&records);
    Ok((records, verdict))
}

pub fn write_records<W: Write>(records: &[StepRecord], thrusters: usize, out: W) -> Result<()> {
    let mut w = StepWriter::new(out, thrusters)?;
    for r in records {
        w.write(r)?;
    }
    w.flush()
}
