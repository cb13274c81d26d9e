//! Torque-to-motor allocation.
//!
//! The mixer is built once from a parameter set (the controller's nominal
//! model) and maps desired body torques about the mass center to signed motor
//! commands through the minimum-norm least-squares solution of `A f = τ`.
//! When a command would exceed ±1 every thruster force is scaled by the same
//! factor so the realized torque stays parallel to the request.

use nalgebra::{Matrix3, Vector3};

use super::motor::{command_from_force, max_force, motor_force};
use super::{BlimpParams, MassGeometry};
use crate::error::{Error, Result};

pub const MAX_THRUSTERS: usize = 8;

/// Signed per-thruster commands in [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotorCommand {
    eta: [f64; MAX_THRUSTERS],
    len: usize,
}

impl MotorCommand {
    pub fn zeros(len: usize) -> Self {
        assert!(len <= MAX_THRUSTERS, "at most {MAX_THRUSTERS} thrusters");
        Self {
            eta: [0.0; MAX_THRUSTERS],
            len,
        }
    }

    /// Clamps every entry into [-1, 1].
    pub fn from_slice(eta: &[f64]) -> Self {
        let mut c = Self::zeros(eta.len());
        for (dst, src) in c.eta.iter_mut().zip(eta) {
            *dst = src.clamp(-1.0, 1.0);
        }
        c
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.eta[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

#[derive(Debug, Clone)]
pub struct Mixer {
    /// Column k is the body torque per newton of thruster k.
    columns: Vec<Vector3<f64>>,
    /// `Aᵀ (A Aᵀ)⁻¹`, the minimum-norm right inverse, stored per thruster.
    pinv_rows: Vec<Vector3<f64>>,
    gain: f64,
}

impl Mixer {
    pub fn new(params: &BlimpParams, geom: &MassGeometry) -> Result<Self> {
        let columns: Vec<Vector3<f64>> = params
            .actuation
            .thrusters
            .iter()
            .map(|t| (t.position() - geom.c_g).cross(&t.direction()))
            .collect();
        if columns.len() > MAX_THRUSTERS {
            return Err(Error::invalid(format!(
                "{} thrusters exceed the supported {MAX_THRUSTERS}",
                columns.len()
            )));
        }
        let gram: Matrix3<f64> = columns.iter().map(|c| c * c.transpose()).sum();
        let rank = gram.rank(1e-12 * gram.amax().max(f64::MIN_POSITIVE));
        if rank < 3 {
            return Err(Error::RankDeficient(rank));
        }
        let inv = gram
            .try_inverse()
            .ok_or(Error::RankDeficient(rank.min(2)))?;
        let pinv_rows = columns.iter().map(|c| inv * c).collect();
        Ok(Self {
            columns,
            pinv_rows,
            gain: params.actuation.motor_gain,
        })
    }

    pub fn thrusters(&self) -> usize {
        self.columns.len()
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// Per-thruster forces for `torque` before any saturation.
    pub fn forces(&self, torque: &Vector3<f64>) -> Vec<f64> {
        self.pinv_rows.iter().map(|r| r.dot(torque)).collect()
    }

    pub fn allocate(&self, torque: &Vector3<f64>) -> MotorCommand {
        let mut forces = self.forces(torque);
        let f_max = max_force(self.gain);
        let peak = forces.iter().fold(0.0f64, |m, f| m.max(f.abs()));
        if peak > f_max {
            let s = f_max / peak;
            forces.iter_mut().for_each(|f| *f *= s);
        }
        let mut cmd = MotorCommand::zeros(forces.len());
        for (eta, f) in cmd.eta.iter_mut().zip(&forces) {
            *eta = command_from_force(*f, self.gain);
        }
        cmd
    }

    /// Body torque about the mass center produced by `cmd` with the given
    /// plant motor gain.
    pub fn torque(&self, cmd: &MotorCommand, gain: f64) -> Vector3<f64> {
        self.columns
            .iter()
            .zip(cmd.as_slice())
            .map(|(c, eta)| c * motor_force(*eta, gain))
            .sum()
    }

    /// Largest torque about each single axis the mixer can realize.
    pub fn max_axis_torque(&self) -> Vector3<f64> {
        let f_max = max_force(self.gain);
        Vector3::from_fn(|axis, _| {
            let dir = Vector3::ith(axis, 1.0);
            let peak = self
                .forces(&dir)
                .iter()
                .fold(0.0f64, |m, f| m.max(f.abs()));
            f_max / peak
        })
    }
}
