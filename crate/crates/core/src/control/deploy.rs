//! Policy transfer onto a mismatched plant: mapping layer, PD handover and
//! the rollout that ties them together.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{inverted_error, roll_deviation, torque_to_action, Controller, PolicyController};
use crate::dynamics::{BlimpParams, BodyState};
use crate::env::{Action, EnvConfig, InvertEnv, StepRecord};
use crate::harness::{rollout, SuccessCriterion, Verdict};
use crate::td3::Mlp;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdGains {
    pub kp: [f64; 3],
    pub kd: [f64; 3],
    /// Rate bound ω_act for handing control to the PD, rad/s.
    pub omega_act: f64,
}

impl Default for PdGains {
    fn default() -> Self {
        Self {
            kp: [0.5, 0.5, 0.02],
            kd: [0.4, 0.4, 0.05],
            omega_act: 0.3,
        }
    }
}

impl PdGains {
    pub fn validate(&self) -> Result<()> {
        if self.kp.iter().chain(&self.kd).any(|g| !(*g >= 0.0)) {
            return Err(Error::invalid("PD gains must be nonnegative"));
        }
        if !(self.omega_act > 0.0) {
            return Err(Error::invalid("omega_act must be positive"));
        }
        Ok(())
    }
}

/// Attitude PD about the inverted pose.
#[derive(Debug, Clone)]
pub struct PdStabilizer {
    gains: PdGains,
    torque_scale: Vector3<f64>,
}

impl PdStabilizer {
    pub fn new(gains: PdGains, torque_scale: Vector3<f64>) -> Result<Self> {
        gains.validate()?;
        Ok(Self { gains, torque_scale })
    }

    pub fn gains(&self) -> &PdGains {
        &self.gains
    }

    pub fn torque(&self, state: &BodyState) -> Vector3<f64> {
        let e = inverted_error(state);
        let g = &self.gains;
        Vector3::from_fn(|i, _| g.kp[i] * e[i] - g.kd[i] * state.omega[i])
    }

    /// Whether `state` is inside the handover region.
    pub fn eligible(&self, state: &BodyState, switch_angle: f64) -> bool {
        roll_deviation(state) < switch_angle && state.omega.norm() < self.gains.omega_act
    }
}

impl Controller for PdStabilizer {
    fn act(&mut self, state: &BodyState, _t: f64) -> Action {
        torque_to_action(&self.torque(state), &self.torque_scale)
    }
}

/// Diagonal rescaling M_0 of policy actions during the transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MappingLayer {
    /// Diagonal (m_φ, m_θ, m_ψ).
    pub scale: [f64; 3],
    /// ϱ, rad.
    pub switch_angle: f64,
}

impl Default for MappingLayer {
    fn default() -> Self {
        Self {
            scale: [0.7, 0.1, 0.1],
            switch_angle: 0.8,
        }
    }
}

impl MappingLayer {
    pub fn identity() -> Self {
        Self {
            scale: [1.0; 3],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale.iter().any(|m| !(*m > 0.0)) {
            return Err(Error::invalid("mapping scale entries must be positive"));
        }
        if !(self.switch_angle > 0.0 && self.switch_angle < std::f64::consts::PI) {
            return Err(Error::invalid("switch_angle must lie in (0, pi)"));
        }
        Ok(())
    }

    /// Mapped action `M_0 a`; multiply by the torque scale for N·m.
    pub fn apply(&self, a: &Action) -> Action {
        [0, 1, 2].map(|i| self.scale[i] * a[i])
    }

    /// `Δφ < ϱ`.
    pub fn handover_eligible(&self, roll_deviation: f64) -> bool {
        roll_deviation < self.switch_angle
    }
}

/// Policy through the mapping layer, handing over to the PD once the
/// attitude is close to inverted and the rates are low. Control returns to
/// the policy if the deviation grows back past `ϱ`: the PD can only hold
/// tilts inside the static torque limit, well below the switch angle.
#[derive(Debug, Clone)]
pub struct DeployController {
    policy: PolicyController,
    mapping: MappingLayer,
    pd: Option<PdStabilizer>,
    handover: Option<f64>,
    active: bool,
}

impl DeployController {
    pub fn new(policy: PolicyController, mapping: MappingLayer, pd: Option<PdStabilizer>) -> Result<Self> {
        mapping.validate()?;
        Ok(Self {
            policy,
            mapping,
            pd,
            handover: None,
            active: false,
        })
    }

    /// Time of the latest handover to the PD, if any.
    pub fn handover(&self) -> Option<f64> {
        self.handover
    }

    pub fn pd_active(&self) -> bool {
        self.active
    }
}

impl Controller for DeployController {
    fn reset(&mut self) {
        self.handover = None;
        self.active = false;
    }

    fn act(&mut self, state: &BodyState, t: f64) -> Action {
        if let Some(pd) = &mut self.pd {
            if !self.active && pd.eligible(state, self.mapping.switch_angle) {
                self.active = true;
                self.handover = Some(t);
            } else if self.active && !self.mapping.handover_eligible(roll_deviation(state)) {
                self.active = false;
            }
            if self.active {
                return pd.act(state, t);
            }
        }
        self.mapping.apply(&self.policy.action(state))
    }
}

/// Default stand-in motor gain: actuation 1/0.7 stronger than the model's
/// 1.7, the excess a 0.7 roll mapping compensates.
pub const REAL_MOTOR_GAIN: f64 = 1.7 / 0.7;

/// Deviations of the stand-in physical robot from the training model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RealDeltas {
    /// m_w1, kg.
    pub top_weight: f64,
    /// m_w2, kg.
    pub bottom_weight: f64,
    pub drag_scale: f64,
    pub inertia_scale: f64,
    /// Overrides g_m when set.
    pub motor_gain: Option<f64>,
}

impl Default for RealDeltas {
    fn default() -> Self {
        Self {
            top_weight: 0.025,
            bottom_weight: 0.0,
            drag_scale: 1.2,
            inertia_scale: 1.1,
            motor_gain: Some(REAL_MOTOR_GAIN),
        }
    }
}

impl RealDeltas {
    /// No change from the model.
    pub fn none(sim: &BlimpParams) -> Self {
        Self {
            top_weight: sim.top_weight(),
            bottom_weight: sim.bottom_weight(),
            drag_scale: 1.0,
            inertia_scale: 1.0,
            motor_gain: None,
        }
    }

    pub fn apply(&self, sim: &BlimpParams) -> Result<BlimpParams> {
        let mut p = sim
            .clone()
            .with_weight_masses(self.top_weight, self.bottom_weight)
            .perturbed(self.drag_scale, self.inertia_scale);
        if let Some(g) = self.motor_gain {
            p = p.with_motor_gain(g);
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeployScenario {
    /// Simulated seconds.
    pub duration: f64,
    /// Initial yaw, rad.
    pub yaw: f64,
    /// Disable to run the mapped policy for the whole episode.
    pub pd_enabled: bool,
    pub real: RealDeltas,
    pub mapping: MappingLayer,
    pub pd: PdGains,
}

impl Default for DeployScenario {
    fn default() -> Self {
        Self {
            duration: 30.0,
            yaw: 0.0,
            pd_enabled: true,
            real: RealDeltas::default(),
            mapping: MappingLayer::default(),
            pd: PdGains::default(),
        }
    }
}

impl DeployScenario {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let sc: Self = toml::from_str(s)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) {
            return Err(Error::invalid("duration must be positive"));
        }
        self.mapping.validate()?;
        self.pd.validate()
    }
}

#[derive(Debug, Clone)]
pub struct DeployOutcome {
    pub records: Vec<StepRecord>,
    pub handover: Option<f64>,
    pub verdict: Verdict,
}

/// Runs `actor` (trained on `sim`) against the scenario's perturbed plant.
/// The mixer stays the one built from `sim`, as it would on hardware.
pub fn deploy_rollout(
    actor: &Mlp<f32>,
    scenario: &DeployScenario,
    sim: &BlimpParams,
    env_config: &EnvConfig,
    criterion: &SuccessCriterion,
) -> Result<DeployOutcome> {
    scenario.validate()?;
    let real = scenario.real.apply(sim)?;
    let mut env = InvertEnv::new(sim.clone(), env_config.clone())?;
    let pd = if scenario.pd_enabled {
        Some(PdStabilizer::new(scenario.pd.clone(), env.torque_scale())?)
    } else {
        None
    };
    let mut c = DeployController::new(PolicyController::new(actor.clone()), scenario.mapping.clone(), pd)?;
    let records = rollout(&mut env, &mut c, real, scenario.yaw, scenario.duration)?;
    let verdict = criterion.judge_records(&records);
    Ok(DeployOutcome {
        records,
        handover: c.handover(),
        verdict,
    })
}
