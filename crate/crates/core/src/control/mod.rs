//! Hand-written controllers and the deployment pipeline.
//!
//! Every controller produces a normalized action in [-1, 1]³ so it can drive
//! [`InvertEnv`](crate::env::InvertEnv) through the same mixer as the
//! learned policy.

mod deploy;
mod energy;

pub use deploy::{
    deploy_rollout, DeployController, DeployOutcome, DeployScenario, MappingLayer, PdGains,
    PdStabilizer,
};
pub use energy::{EnergyShaping, EnergyShapingGains};
pub use deploy::{RealDeltas, REAL_MOTOR_GAIN};

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::dynamics::BodyState;
use crate::env::{observe, Action};
use crate::so3::{euler_from_rotation, rotation_error, RotationMatrix};
use crate::td3::Mlp;

pub trait Controller {
    /// Clears any internal state before an episode.
    fn reset(&mut self) {}

    /// Normalized action for the current state at episode time `t`.
    fn act(&mut self, state: &BodyState, t: f64) -> Action;
}

/// Signed roll error relative to the inverted pose, in (-π, π]: zero at
/// roll ±π, negative just short of +π.
pub fn signed_roll_error(state: &BodyState) -> f64 {
    let roll = euler_from_rotation(&state.rotation).roll;
    if roll >= 0.0 {
        roll - PI
    } else {
        roll + PI
    }
}

/// Δφ = π - |φ|.
pub fn roll_deviation(state: &BodyState) -> f64 {
    PI - euler_from_rotation(&state.rotation).roll.abs()
}

/// Body-frame rotation vector taking the current attitude to the inverted
/// pose.
pub fn inverted_error(state: &BodyState) -> Vector3<f64> {
    let e = rotation_error(&state.rotation, &RotationMatrix::inverted());
    e.axis * e.angle
}

/// Converts a desired torque into a normalized action.
pub fn torque_to_action(torque: &Vector3<f64>, scale: &Vector3<f64>) -> Action {
    [0, 1, 2].map(|i| (torque[i] / scale[i]).clamp(-1.0, 1.0))
}

/// A trained actor network used as a controller.
#[derive(Debug, Clone)]
pub struct PolicyController {
    actor: Mlp<f32>,
}

impl PolicyController {
    pub fn new(actor: Mlp<f32>) -> Self {
        Self { actor }
    }

    pub fn actor(&self) -> &Mlp<f32> {
        &self.actor
    }

    pub fn action(&self, state: &BodyState) -> Action {
        let obs = observe(state).map(|v| v as f32);
        let y = self.actor.predict(&obs, 1);
        [0, 1, 2].map(|i| f64::from(y[i]).clamp(-1.0, 1.0))
    }
}

impl Controller for PolicyController {
    fn act(&mut self, state: &BodyState, _t: f64) -> Action {
        self.action(state)
    }
}

/// Outputs nothing; the blimp hangs at rest.
#[derive(Debug, Clone, Copy, Default)]
pub struct Passive;

impl Controller for Passive {
    fn act(&mut self, _state: &BodyState, _t: f64) -> Action {
        [0.0; 3]
    }
}
