//! Blimp physical model: parameters, center-of-gravity geometry, motor
//! curve, thrust allocation and the rigid-body integrator.

mod allocation;
mod body;
mod geometry;
mod motor;
mod params;

pub use allocation::{Mixer, MotorCommand, MAX_THRUSTERS};
pub use body::{
    coriolis_wrench, drag_wrench, mechanical_energy, net_wrench, restoring_wrench, step,
    thrust_wrench, wrench_terms, BodyState, Plant, StepOutcome, Wrench, WrenchTerms,
    DIVERGENCE_LIMIT,
};
pub use geometry::{derive_geometry, moment_offset, neutral_extra_weight, MassGeometry};
pub use motor::{command_from_force, dead_band, max_force, motor_force};
pub use params::{
    ActuationProps, BlimpParams, FluidProps, InertiaProps, MassProps, ShapeProps, Thruster,
    DEFAULT_PARAMS_TOML,
};
