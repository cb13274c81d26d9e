//! Energy-pumping swing-up with linear capture feedback.
//!
//! The roll axis is treated as a pendulum with potential
//! `U(φ) = M (1 - cos φ)` where `M` is the restoring moment of the model.
//! Away from the inverted pose the controller pushes along ω_x with a torque
//! proportional to the energy deficit; close to it, a linear feedback on the
//! attitude error and rates takes over. All model quantities come from the
//! parameter set the controller was tuned on.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{inverted_error, roll_deviation, torque_to_action, Controller};
use crate::dynamics::{derive_geometry, BlimpParams, BodyState};
use crate::env::Action;
use crate::so3::{euler_from_rotation, rotation_error, rotation_from_euler, EulerAngles};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyShapingGains {
    /// Pump gain k_e, N·m per J.
    pub k_e: f64,
    /// Capture region Δφ_sw, rad.
    pub switch_angle: f64,
    /// Capture feedback: torque per rad of attitude error.
    pub capture_kp: [f64; 3],
    /// Capture feedback: torque per rad/s.
    pub capture_kd: [f64; 3],
    /// Pitch/yaw regulation during the swing.
    pub swing_kp: f64,
    pub swing_kd: f64,
    pub yaw_kd: f64,
    /// Roll torque applied at the start to leave the rest pose, N·m.
    pub kick_torque: f64,
    pub kick_time: f64,
}

impl Default for EnergyShapingGains {
    fn default() -> Self {
        Self {
            k_e: 2.0,
            switch_angle: 0.6,
            capture_kp: [0.5, 0.5, 0.02],
            capture_kd: [0.4, 0.4, 0.05],
            swing_kp: 0.2,
            swing_kd: 0.2,
            yaw_kd: 0.05,
            kick_torque: 0.05,
            kick_time: 0.5,
        }
    }
}

impl EnergyShapingGains {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_e > 0.0) {
            return Err(Error::invalid("k_e must be positive"));
        }
        if !(self.switch_angle > 0.0 && self.switch_angle < std::f64::consts::PI) {
            return Err(Error::invalid("switch_angle must lie in (0, pi)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EnergyShaping {
    gains: EnergyShapingGains,
    /// Model restoring moment `M`, N·m.
    moment: f64,
    /// Model roll inertia including added inertia, kg·m².
    inertia_x: f64,
    torque_scale: Vector3<f64>,
}

impl EnergyShaping {
    pub fn new(model: &BlimpParams, gains: EnergyShapingGains, torque_scale: Vector3<f64>) -> Result<Self> {
        gains.validate()?;
        let geom = derive_geometry(model)?;
        Ok(Self {
            gains,
            moment: geom.restoring_moment(),
            inertia_x: model.rotational_inertia().x,
            torque_scale,
        })
    }

    pub fn gains(&self) -> &EnergyShapingGains {
        &self.gains
    }

    /// Model roll energy `½ I ω_x² + M (1 - cos φ)`.
    pub fn energy(&self, state: &BodyState) -> f64 {
        let roll = euler_from_rotation(&state.rotation).roll;
        0.5 * self.inertia_x * state.omega.x * state.omega.x + self.moment * (1.0 - roll.cos())
    }

    /// Energy of the inverted rest pose, `2 M`.
    pub fn target_energy(&self) -> f64 {
        2.0 * self.moment
    }

    pub fn torque(&self, state: &BodyState, t: f64) -> Vector3<f64> {
        let g = &self.gains;
        let w = state.omega;
        if roll_deviation(state) < g.switch_angle {
            let e = inverted_error(state);
            return Vector3::from_fn(|i, _| g.capture_kp[i] * e[i] - g.capture_kd[i] * w[i]);
        }
        let roll_torque = if t < g.kick_time {
            g.kick_torque
        } else {
            let deficit = self.target_energy() - self.energy(state);
            g.k_e * deficit * sign(w.x)
        };
        // Hold pitch at zero while keeping the current roll and yaw.
        let eu = euler_from_rotation(&state.rotation);
        let level = rotation_from_euler(&EulerAngles::new(eu.roll, 0.0, eu.yaw));
        let err = rotation_error(&state.rotation, &level);
        let e = err.axis * err.angle;
        Vector3::new(
            roll_torque,
            g.swing_kp * e.y - g.swing_kd * w.y,
            g.swing_kp * e.z - g.yaw_kd * w.z,
        )
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl Controller for EnergyShaping {
    fn act(&mut self, state: &BodyState, t: f64) -> Action {
        torque_to_action(&self.torque(state, t), &self.torque_scale)
    }
}
