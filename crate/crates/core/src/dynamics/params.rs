use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Masses in kg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassProps {
    pub gondola: f64,
    pub battery: f64,
    /// Deflated envelope.
    pub envelope: f64,
    /// Extra trim weight `m_w`.
    pub extra_weight: f64,
    /// Fraction `λ` of the extra weight placed at the envelope top.
    pub weight_split: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidProps {
    /// kg/m³
    pub helium_density: f64,
    /// kg/m³
    pub air_density: f64,
    /// Inflated envelope volume, m³.
    pub volume: f64,
    /// m/s²
    pub gravity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeProps {
    pub gondola_half_height: f64,
    pub envelope_half_height: f64,
}

/// Diagonal mass, inertia and drag coefficients. None of these are
/// identified values; they are calibration knobs of the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertiaProps {
    /// Principal rigid-body inertia about the mass center, kg·m².
    pub rigid_body: [f64; 3],
    /// Added mass (kg, first three) and added inertia (kg·m², last three).
    pub added: [f64; 6],
    /// Quadratic translational drag, N·s²/m².
    pub drag_linear: [f64; 3],
    /// Quadratic rotational drag, N·m·s².
    pub drag_angular: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thruster {
    /// Mounting point in the gondola frame (origin at the thrust center), m.
    pub position: [f64; 3],
    /// Unit thrust direction in the body frame.
    pub direction: [f64; 3],
}

impl Thruster {
    pub fn position(&self) -> Vector3<f64> {
        Vector3::from(self.position)
    }

    pub fn direction(&self) -> Vector3<f64> {
        Vector3::from(self.direction)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActuationProps {
    /// Motor gain `g_m` of the plant.
    pub motor_gain: f64,
    /// Per-axis torque (N·m) that an action of magnitude 1 requests.
    pub torque_scale: [f64; 3],
    pub thrusters: Vec<Thruster>,
}

/// Every physical parameter of the blimp model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlimpParams {
    pub mass: MassProps,
    pub fluid: FluidProps,
    pub shape: ShapeProps,
    pub inertia: InertiaProps,
    pub actuation: ActuationProps,
}

/// Default parameter file shipped with the crate.
pub const DEFAULT_PARAMS_TOML: &str = include_str!("../../config/blimp_default.toml");

impl Default for BlimpParams {
    fn default() -> Self {
        Self::from_toml_str(DEFAULT_PARAMS_TOML).expect("bundled parameter file is valid")
    }
}

impl BlimpParams {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let params: BlimpParams = toml::from_str(s)?;
        params.validate()?;
        Ok(params)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("params serialize")
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.mass;
        let f = &self.fluid;
        let s = &self.shape;
        let positive = [
            ("mass.gondola", m.gondola),
            ("mass.battery", m.battery),
            ("mass.envelope", m.envelope),
            ("fluid.helium_density", f.helium_density),
            ("fluid.air_density", f.air_density),
            ("fluid.volume", f.volume),
            ("fluid.gravity", f.gravity),
            ("shape.gondola_half_height", s.gondola_half_height),
            ("shape.envelope_half_height", s.envelope_half_height),
            ("actuation.motor_gain", self.actuation.motor_gain),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(m.extra_weight.is_finite() && m.extra_weight >= 0.0) {
            return Err(Error::invalid("mass.extra_weight must be >= 0"));
        }
        if !(0.0..=1.0).contains(&m.weight_split) {
            return Err(Error::invalid(format!(
                "mass.weight_split must lie in [0, 1], got {}",
                m.weight_split
            )));
        }
        let i = &self.inertia;
        let nonneg = i
            .added
            .iter()
            .chain(&i.drag_linear)
            .chain(&i.drag_angular)
            .all(|v| v.is_finite() && *v >= 0.0);
        if !nonneg || !i.rigid_body.iter().all(|v| *v > 0.0) {
            return Err(Error::invalid(
                "inertia: rigid_body must be > 0, added and drag >= 0",
            ));
        }
        if self.actuation.thrusters.is_empty() {
            return Err(Error::invalid("at least one thruster is required"));
        }
        for (k, t) in self.actuation.thrusters.iter().enumerate() {
            if (t.direction().norm() - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!(
                    "thruster {k} direction is not a unit vector"
                )));
            }
        }
        if !self.actuation.torque_scale.iter().all(|v| *v > 0.0) {
            return Err(Error::invalid("actuation.torque_scale must be > 0"));
        }
        Ok(())
    }

    /// Helium mass `ρ_h V`.
    pub fn helium_mass(&self) -> f64 {
        self.fluid.helium_density * self.fluid.volume
    }

    /// Masses that do not change with the trim weight.
    pub fn fixed_mass(&self) -> f64 {
        let m = &self.mass;
        m.gondola + m.battery + m.envelope + self.helium_mass()
    }

    pub fn buoyant_mass(&self) -> f64 {
        self.fluid.air_density * self.fluid.volume
    }

    pub fn with_extra_weight(mut self, m_w: f64) -> Self {
        self.mass.extra_weight = m_w;
        self
    }

    pub fn with_weight_split(mut self, lambda: f64) -> Self {
        self.mass.weight_split = lambda;
        self
    }

    pub fn with_motor_gain(mut self, g_m: f64) -> Self {
        self.actuation.motor_gain = g_m;
        self
    }

    /// Sets the extra weight from explicit top/bottom masses
    /// (`m_w1`, `m_w2`).
    pub fn with_weight_masses(mut self, top: f64, bottom: f64) -> Self {
        let total = top + bottom;
        self.mass.extra_weight = total;
        self.mass.weight_split = if total > 0.0 { top / total } else { 1.0 };
        self
    }

    /// Top part `m_w1 = λ m_w`.
    pub fn top_weight(&self) -> f64 {
        self.mass.weight_split * self.mass.extra_weight
    }

    /// Bottom part `m_w2 = (1 - λ) m_w`.
    pub fn bottom_weight(&self) -> f64 {
        (1.0 - self.mass.weight_split) * self.mass.extra_weight
    }

    pub fn translational_mass(&self, total_mass: f64) -> Vector3<f64> {
        let a = &self.inertia.added;
        Vector3::new(total_mass + a[0], total_mass + a[1], total_mass + a[2])
    }

    pub fn rotational_inertia(&self) -> Vector3<f64> {
        let i = &self.inertia;
        Vector3::new(
            i.rigid_body[0] + i.added[3],
            i.rigid_body[1] + i.added[4],
            i.rigid_body[2] + i.added[5],
        )
    }

    /// Scales rotational and translational drag by `drag` and rigid-body
    /// inertia by `inertia`.
    pub fn perturbed(mut self, drag: f64, inertia: f64) -> Self {
        let i = &mut self.inertia;
        i.drag_linear.iter_mut().for_each(|v| *v *= drag);
        i.drag_angular.iter_mut().for_each(|v| *v *= drag);
        i.rigid_body.iter_mut().for_each(|v| *v *= inertia);
        self
    }
}
