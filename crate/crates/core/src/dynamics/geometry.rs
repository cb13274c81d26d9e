//! Center-of-gravity geometry of the gondola/envelope stack.
//!
//! Body-frame coordinates put the origin at the thrust center `c_t` with the
//! z axis pointing from the gondola toward the envelope. The buoyancy center
//! `c_b` sits `r_t = h_t + h_e` above it and the mass center `c_g` sits
//! `h_g` above it.

use nalgebra::Vector3;

use super::BlimpParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassGeometry {
    /// Helium mass, kg.
    pub helium_mass: f64,
    /// Total rigid-body mass `m_rb`, kg.
    pub total_mass: f64,
    /// Distance from thrust center to buoyancy center `r_t^b`, m.
    pub thrust_to_buoyancy: f64,
    /// Height of the mass center above the thrust center `h_g`, m.
    pub cg_height: f64,
    /// Distance from mass center to buoyancy center `r_z^b`, m.
    pub cg_to_buoyancy: f64,
    pub c_g: Vector3<f64>,
    pub c_b: Vector3<f64>,
    pub c_t: Vector3<f64>,
    /// Buoyant force magnitude `ρ_air V g`, N.
    pub buoyancy: f64,
    /// Weight `m_rb g`, N.
    pub weight: f64,
}

impl MassGeometry {
    /// Peak restoring moment of the buoyancy couple about the mass center.
    pub fn restoring_moment(&self) -> f64 {
        self.buoyancy * self.cg_to_buoyancy
    }
}

/// Mass-weighted height terms: `d_m = m_bat h_t + (m_e + m_h) r_t`.
pub fn moment_offset(params: &BlimpParams) -> f64 {
    let m = &params.mass;
    let h_t = params.shape.gondola_half_height;
    let r_t = h_t + params.shape.envelope_half_height;
    m.battery * h_t + (m.envelope + params.helium_mass()) * r_t
}

pub fn derive_geometry(params: &BlimpParams) -> Result<MassGeometry> {
    let m = &params.mass;
    let h_t = params.shape.gondola_half_height;
    let h_e = params.shape.envelope_half_height;
    let r_t = h_t + h_e;
    let helium_mass = params.helium_mass();
    let m_w1 = params.top_weight();
    let m_w2 = params.bottom_weight();
    let total_mass = m.gondola + m.battery + m.envelope + helium_mass + m_w1 + m_w2;
    let h_g = (moment_offset(params) + m.extra_weight * (h_t + 2.0 * m.weight_split * h_e))
        / total_mass;
    if !(h_g.is_finite() && h_g >= 0.0 && h_g <= r_t) {
        return Err(Error::Geometry { h_g, r_t });
    }
    let g = params.fluid.gravity;
    Ok(MassGeometry {
        helium_mass,
        total_mass,
        thrust_to_buoyancy: r_t,
        cg_height: h_g,
        cg_to_buoyancy: r_t - h_g,
        c_g: Vector3::new(0.0, 0.0, h_g),
        c_b: Vector3::new(0.0, 0.0, r_t),
        c_t: Vector3::zeros(),
        buoyancy: params.buoyant_mass() * g,
        weight: total_mass * g,
    })
}

/// Extra weight that makes weight equal buoyancy, clamped at zero.
pub fn neutral_extra_weight(params: &BlimpParams) -> f64 {
    (params.buoyant_mass() - params.fixed_mass()).max(0.0)
}
