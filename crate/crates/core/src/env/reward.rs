use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::dynamics::BodyState;
use crate::so3::{rotation_error, RotationMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardParams {
    pub g_omega: [f64; 3],
    pub g_action: [f64; 3],
    pub g_roll: f64,
    pub g_pitch: f64,
    pub g_yaw: f64,
    /// Precision-bonus radius ζ, rad.
    pub zeta: f64,
    /// Cap on the weighted orientation error.
    pub g_n: f64,
    /// Angular-rate normalizer and over-range bound, rad/s.
    pub omega_max: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self {
            g_omega: [0.01; 3],
            g_action: [0.001; 3],
            g_roll: 5.0,
            g_pitch: 5.0,
            g_yaw: 0.5,
            zeta: 0.1,
            g_n: 10.0,
            omega_max: 2.0 * PI,
        }
    }
}

impl RewardParams {
    pub fn validate(&self) -> Result<()> {
        let weights = self
            .g_omega
            .iter()
            .chain(&self.g_action)
            .chain([&self.g_roll, &self.g_pitch, &self.g_yaw]);
        if weights.into_iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::invalid("reward weights must be nonnegative"));
        }
        if !(self.zeta > 0.0 && self.zeta < PI) {
            return Err(Error::invalid("zeta must lie in (0, pi)"));
        }
        if !(self.g_n > 0.0 && self.omega_max > 0.0) {
            return Err(Error::invalid("g_n and omega_max must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardTerms {
    /// Shaped orientation term `exp(-clip(...))`.
    pub orientation: f64,
    /// Precision bonus inside ζ of the inverted pose.
    pub bonus: f64,
    pub rate: f64,
    pub action: f64,
}

impl RewardTerms {
    pub fn rotation(&self) -> f64 {
        self.orientation + self.bonus
    }

    pub fn total(&self) -> f64 {
        self.orientation + self.bonus + self.rate + self.action
    }
}

pub fn reward_terms(state: &BodyState, torque: &Vector3<f64>, rp: &RewardParams) -> RewardTerms {
    let err = rotation_error(&state.rotation, &RotationMatrix::inverted());
    let phi = err.angle;
    let e = err.axis * (phi / PI);
    let weighted = rp.g_roll * e.x.abs() + rp.g_pitch * e.y.abs() + rp.g_yaw * e.z.abs();
    let orientation = (-weighted.clamp(0.0, rp.g_n)).exp();
    let bonus = if phi < rp.zeta { 1.0 - phi / rp.zeta } else { 0.0 };
    let rate = -(0..3)
        .map(|i| rp.g_omega[i] * state.omega[i].abs())
        .sum::<f64>()
        / rp.omega_max;
    let action = -(0..3).map(|i| rp.g_action[i] * torque[i].abs()).sum::<f64>();
    RewardTerms {
        orientation,
        bonus,
        rate,
        action,
    }
}

/// Reward for arriving in `state` after commanding `torque` (N·m).
pub fn reward(state: &BodyState, torque: &Vector3<f64>, rp: &RewardParams) -> f64 {
    reward_terms(state, torque, rp).total()
}
