//! Episodic inversion task: observation, reward, reset and termination.
//!
//! The controller side (the torque mixer) is built from a fixed nominal
//! parameter set while every reset may hand the plant a different one. That
//! split is what domain randomization and sim-to-sim transfer vary.

mod log;
mod reward;

pub use log::{fmt9, StepRecord, StepWriter, STEP_HEADER};
pub use reward::{reward, reward_terms, RewardParams, RewardTerms};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::dynamics::{BlimpParams, BodyState, Mixer, MotorCommand, Plant, Wrench};
use crate::so3::RotationMatrix;
use crate::{Error, Result};

pub const OBS_DIM: usize = 12;
pub const ACT_DIM: usize = 3;

pub type Observation = [f64; OBS_DIM];
pub type Action = [f64; ACT_DIM];

/// Flattens `R` row-major and appends ω.
pub fn observe(state: &BodyState) -> Observation {
    let mut obs = [0.0; OBS_DIM];
    obs[..9].copy_from_slice(&state.rotation.to_row_major());
    obs[9..].copy_from_slice(state.omega.as_slice());
    obs
}

/// Recovers `(R, ω)` from an observation; `R` is re-orthonormalized.
pub fn decode_observation(obs: &Observation) -> (RotationMatrix, Vector3<f64>) {
    (
        RotationMatrix::from_row_major(&obs[..9]),
        Vector3::new(obs[9], obs[10], obs[11]),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    /// Integrator step, s.
    pub dt: f64,
    /// Time one action is held, s. Must be a whole multiple of `dt`.
    pub control_period: f64,
    /// Episode length t_e, s.
    pub episode_time: f64,
    /// Position bound for the over-range check, m.
    pub position_limit: f64,
    /// End episodes that leave the rate bound (and, if enabled, the
    /// position bound).
    pub terminate_over_range: bool,
    /// Also end episodes on the position bound. Position is not observed.
    pub terminate_on_position: bool,
    pub reward: RewardParams,
    /// Torque per unit action, N·m. `None` uses the mixer's per-axis limit.
    pub torque_scale: Option<[f64; 3]>,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            dt: 0.02,
            control_period: 0.1,
            episode_time: 30.0,
            position_limit: 3.0,
            terminate_over_range: true,
            terminate_on_position: false,
            reward: RewardParams::default(),
            torque_scale: None,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.control_period > 0.0 && self.episode_time > 0.0) {
            return Err(Error::invalid("dt, control_period and episode_time must be positive"));
        }
        let ratio = self.control_period / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
            return Err(Error::invalid(format!(
                "control_period {} is not a multiple of dt {}",
                self.control_period, self.dt
            )));
        }
        if self.position_limit <= 0.0 {
            return Err(Error::invalid("position_limit must be positive"));
        }
        self.reward.validate()
    }

    pub fn substeps(&self) -> usize {
        (self.control_period / self.dt).round() as usize
    }

    /// Control steps per full episode.
    pub fn max_steps(&self) -> usize {
        (self.episode_time / self.control_period).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub obs: Observation,
    pub reward: f64,
    /// Failure: over range or integrator divergence. Masks bootstrapping.
    pub terminated: bool,
    /// Episode time limit reached.
    pub truncated: bool,
}

impl StepResult {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

pub fn over_range(state: &BodyState, position_limit: f64, omega_max: f64) -> bool {
    state.position.norm() > position_limit || state.omega.iter().any(|w| w.abs() > omega_max)
}

#[derive(Debug, Clone)]
pub struct InvertEnv {
    config: EnvConfig,
    nominal: BlimpParams,
    mixer: Mixer,
    torque_scale: Vector3<f64>,
    plant: Plant,
    state: BodyState,
    time: f64,
    steps: usize,
    last_command: MotorCommand,
    external: Wrench,
}

impl InvertEnv {
    /// `nominal` is the controller's model; it is also the plant until a
    /// reset supplies something else.
    pub fn new(nominal: BlimpParams, config: EnvConfig) -> Result<Self> {
        config.validate()?;
        let plant = Plant::new(nominal.clone())?;
        let mixer = plant.mixer()?;
        let torque_scale = match config.torque_scale {
            Some(s) => Vector3::from(s),
            None => mixer.max_axis_torque(),
        };
        let last_command = MotorCommand::zeros(mixer.thrusters());
        Ok(Self {
            config,
            nominal,
            mixer,
            torque_scale,
            plant,
            state: BodyState::at_rest(RotationMatrix::identity()),
            time: 0.0,
            steps: 0,
            last_command,
            external: Wrench::default(),
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn nominal(&self) -> &BlimpParams {
        &self.nominal
    }

    pub fn plant(&self) -> &Plant {
        &self.plant
    }

    pub fn mixer(&self) -> &Mixer {
        &self.mixer
    }

    pub fn torque_scale(&self) -> Vector3<f64> {
        self.torque_scale
    }

    pub fn state(&self) -> &BodyState {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn last_command(&self) -> &MotorCommand {
        &self.last_command
    }

    /// Constant disturbance applied on every integrator step.
    pub fn set_external(&mut self, w: Wrench) {
        self.external = w;
    }

    /// Resets with the nominal parameters and weight split `lambda`.
    pub fn reset(&mut self, lambda: f64, yaw: f64) -> Result<Observation> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::invalid(format!("weight split {lambda} outside [0, 1]")));
        }
        let params = self.nominal.clone().with_weight_split(lambda);
        self.reset_with(params, yaw)
    }

    /// Resets with an arbitrary plant: upright rest, rotated by `yaw` about
    /// the world vertical.
    pub fn reset_with(&mut self, plant: BlimpParams, yaw: f64) -> Result<Observation> {
        self.plant = Plant::new(plant)?;
        self.reset_state(BodyState::at_rest(RotationMatrix::about_z(yaw)));
        Ok(observe(&self.state))
    }

    /// Restarts the clock from an explicit state, keeping the plant.
    pub fn reset_state(&mut self, state: BodyState) {
        self.state = state;
        self.time = 0.0;
        self.steps = 0;
        self.last_command = MotorCommand::zeros(self.mixer.thrusters());
    }

    pub fn observation(&self) -> Observation {
        observe(&self.state)
    }

    /// Desired torque for a (clamped) normalized action.
    pub fn action_torque(&self, action: &Action) -> Vector3<f64> {
        Vector3::from_fn(|i, _| action[i].clamp(-1.0, 1.0) * self.torque_scale[i])
    }

    pub fn step(&mut self, action: &Action) -> StepResult {
        let torque = self.action_torque(action);
        let cmd = self.mixer.allocate(&torque);
        self.step_command(&cmd, action)
    }

    /// Holds `cmd` for one control period. `action` only enters the reward.
    pub fn step_command(&mut self, cmd: &MotorCommand, action: &Action) -> StepResult {
        let mut diverged = false;
        for _ in 0..self.config.substeps() {
            let out = self.plant.step(&self.state, cmd, &self.external, self.config.dt);
            self.state = out.state;
            if out.diverged {
                diverged = true;
                break;
            }
        }
        self.last_command = *cmd;
        self.steps += 1;
        self.time = self.steps as f64 * self.config.control_period;
        let torque = self.action_torque(action);
        let reward = reward(&self.state, &torque, &self.config.reward);
        let limit = if self.config.terminate_on_position {
            self.config.position_limit
        } else {
            f64::INFINITY
        };
        let out_of_range = self.config.terminate_over_range
            && over_range(&self.state, limit, self.config.reward.omega_max);
        let terminated = diverged || out_of_range;
        let truncated = !terminated && self.time >= self.config.episode_time - 1e-9;
        StepResult {
            obs: observe(&self.state),
            reward: if reward.is_finite() { reward } else { 0.0 },
            terminated,
            truncated,
        }
    }
}
