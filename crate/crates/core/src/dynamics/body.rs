//! Rigid-body state, force/torque model and the fixed-step integrator.
//!
//! Rotational dynamics are written about the mass center `c_g`; `position`
//! tracks `c_g` in the world frame (z up). Linear and angular velocity are
//! body-frame quantities.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::allocation::{Mixer, MotorCommand};
use super::{BlimpParams, MassGeometry};
use crate::so3::{integrate_rotation, RotationMatrix};

/// Any state component above this magnitude counts as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BodyState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub rotation: RotationMatrix,
    pub omega: Vector3<f64>,
}

impl BodyState {
    pub fn at_rest(rotation: RotationMatrix) -> Self {
        Self {
            rotation,
            ..Self::default()
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite())
            && self.velocity.iter().all(|v| v.is_finite())
            && self.omega.iter().all(|v| v.is_finite())
            && self.rotation.matrix().iter().all(|v| v.is_finite())
    }

    fn diverged(&self) -> bool {
        !self.is_finite()
            || self.position.amax() > DIVERGENCE_LIMIT
            || self.velocity.amax() > DIVERGENCE_LIMIT
            || self.omega.amax() > DIVERGENCE_LIMIT
    }
}

/// Force and torque in the body frame; torque about the mass center.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Wrench {
    pub force: Vector3<f64>,
    pub torque: Vector3<f64>,
}

impl Wrench {
    pub fn new(force: Vector3<f64>, torque: Vector3<f64>) -> Self {
        Self { force, torque }
    }
}

impl std::ops::Add for Wrench {
    type Output = Wrench;
    fn add(self, rhs: Wrench) -> Wrench {
        Wrench::new(self.force + rhs.force, self.torque + rhs.torque)
    }
}

/// The separate wrench terms, for logging and tests.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WrenchTerms {
    pub thrust: Wrench,
    pub restoring: Wrench,
    pub drag: Wrench,
    pub coriolis: Wrench,
    pub external: Wrench,
}

impl WrenchTerms {
    pub fn total(&self) -> Wrench {
        self.thrust + self.restoring + self.drag + self.coriolis + self.external
    }
}

/// Thrust from each motor at its mounting point, with the plant's gain.
pub fn thrust_wrench(cmd: &MotorCommand, params: &BlimpParams, geom: &MassGeometry) -> Wrench {
    let gain = params.actuation.motor_gain;
    params
        .actuation
        .thrusters
        .iter()
        .zip(cmd.as_slice())
        .fold(Wrench::default(), |acc, (t, eta)| {
            let f = t.direction() * super::motor_force(*eta, gain);
            acc + Wrench::new(f, (t.position() - geom.c_g).cross(&f))
        })
}

/// Gravity at `c_g` plus buoyancy at `c_b`, rotated into the body frame.
pub fn restoring_wrench(rotation: &RotationMatrix, geom: &MassGeometry) -> Wrench {
    let up = rotation.inverse_rotate(&Vector3::z());
    let gravity = -up * geom.weight;
    let buoyancy = up * geom.buoyancy;
    Wrench::new(gravity + buoyancy, (geom.c_b - geom.c_g).cross(&buoyancy))
}

pub fn drag_wrench(state: &BodyState, params: &BlimpParams) -> Wrench {
    let lin = Vector3::from(params.inertia.drag_linear);
    let rot = Vector3::from(params.inertia.drag_angular);
    let v = &state.velocity;
    let w = &state.omega;
    Wrench::new(
        -lin.component_mul(&v.abs()).component_mul(v),
        -rot.component_mul(&w.abs()).component_mul(w),
    )
}

/// `-(C_rb + C_a) ν` for diagonal mass and inertia.
pub fn coriolis_wrench(state: &BodyState, params: &BlimpParams, geom: &MassGeometry) -> Wrench {
    let m = params.translational_mass(geom.total_mass);
    let i = params.rotational_inertia();
    let v = &state.velocity;
    let w = &state.omega;
    let mv = m.component_mul(v);
    let iw = i.component_mul(w);
    Wrench::new(-w.cross(&mv), -(w.cross(&iw) + v.cross(&mv)))
}

pub fn wrench_terms(
    state: &BodyState,
    cmd: &MotorCommand,
    params: &BlimpParams,
    geom: &MassGeometry,
    external: &Wrench,
) -> WrenchTerms {
    WrenchTerms {
        thrust: thrust_wrench(cmd, params, geom),
        restoring: restoring_wrench(&state.rotation, geom),
        drag: drag_wrench(state, params),
        coriolis: coriolis_wrench(state, params, geom),
        external: *external,
    }
}

pub fn net_wrench(
    state: &BodyState,
    cmd: &MotorCommand,
    params: &BlimpParams,
    geom: &MassGeometry,
    external: &Wrench,
) -> Wrench {
    wrench_terms(state, cmd, params, geom, external).total()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub state: BodyState,
    pub diverged: bool,
}

/// One semi-implicit Euler step: velocities first, then pose with the new
/// velocities.
pub fn step(
    state: &BodyState,
    cmd: &MotorCommand,
    params: &BlimpParams,
    geom: &MassGeometry,
    external: &Wrench,
    dt: f64,
) -> StepOutcome {
    debug_assert!(dt > 0.0);
    let w = net_wrench(state, cmd, params, geom, external);
    let m = params.translational_mass(geom.total_mass);
    let i = params.rotational_inertia();
    let velocity = state.velocity + w.force.component_div(&m) * dt;
    let omega = state.omega + w.torque.component_div(&i) * dt;
    let position = state.position + state.rotation.rotate(&velocity) * dt;
    let rotation = integrate_rotation(&state.rotation, &omega, dt);
    let next = BodyState {
        position,
        velocity,
        rotation,
        omega,
    };
    StepOutcome {
        diverged: next.diverged(),
        state: next,
    }
}

/// Kinetic energy (with added mass) plus gravity/buoyancy potential, J.
pub fn mechanical_energy(state: &BodyState, params: &BlimpParams, geom: &MassGeometry) -> f64 {
    let m = params.translational_mass(geom.total_mass);
    let i = params.rotational_inertia();
    let kinetic = 0.5 * m.component_mul(&state.velocity).dot(&state.velocity)
        + 0.5 * i.component_mul(&state.omega).dot(&state.omega);
    let z_g = state.position.z;
    let z_b = z_g + state.rotation.rotate(&(geom.c_b - geom.c_g)).z;
    kinetic + geom.weight * z_g - geom.buoyancy * z_b
}

/// A parameter set with its derived geometry and the controller-side mixer.
#[derive(Debug, Clone)]
pub struct Plant {
    pub params: BlimpParams,
    pub geom: MassGeometry,
}

impl Plant {
    pub fn new(params: BlimpParams) -> crate::Result<Self> {
        params.validate()?;
        let geom = super::derive_geometry(&params)?;
        Ok(Self { params, geom })
    }

    pub fn mixer(&self) -> crate::Result<Mixer> {
        Mixer::new(&self.params, &self.geom)
    }

    pub fn step(&self, state: &BodyState, cmd: &MotorCommand, external: &Wrench, dt: f64) -> StepOutcome {
        step(state, cmd, &self.params, &self.geom, external, dt)
    }

    pub fn energy(&self, state: &BodyState) -> f64 {
        mechanical_energy(state, &self.params, &self.geom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::neutral_extra_weight;
    use approx::assert_abs_diff_eq;

    fn neutral_plant() -> Plant {
        let p = BlimpParams::default();
        let w = neutral_extra_weight(&p);
        Plant::new(p.with_extra_weight(w)).unwrap()
    }

    fn idle() -> MotorCommand {
        MotorCommand::zeros(4)
    }

    #[test]
    fn upright_and_inverted_rest_are_balanced() {
        let plant = neutral_plant();
        for r in [RotationMatrix::identity(), RotationMatrix::inverted()] {
            let w = net_wrench(
                &BodyState::at_rest(r),
                &idle(),
                &plant.params,
                &plant.geom,
                &Wrench::default(),
            );
            assert!(w.force.amax() < 1e-9, "{:?}", w.force);
            assert!(w.torque.amax() < 1e-9, "{:?}", w.torque);
        }
    }

    #[test]
    fn roll_perturbation_restoring_torque() {
        let plant = neutral_plant();
        let state = BodyState::at_rest(RotationMatrix::about_x(0.1));
        let w = net_wrench(&state, &idle(), &plant.params, &plant.geom, &Wrench::default());
        let expected = plant.geom.weight * plant.geom.cg_to_buoyancy * 0.1f64.sin();
        assert!(w.torque.x < 0.0);
        assert_abs_diff_eq!(w.torque.x, -expected, epsilon = 1e-9);
        assert_abs_diff_eq!(w.torque.y, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn kinematics_only_step() {
        let mut p = BlimpParams::default();
        p.inertia.drag_angular = [0.0; 3];
        let w = neutral_extra_weight(&p);
        let plant = Plant::new(p.with_extra_weight(w)).unwrap();
        let mut s = BodyState::at_rest(RotationMatrix::inverted());
        s.omega.x = 1.0;
        // At the inverted pose the restoring torque is zero to first order;
        // compare against pure kinematics with the post-update rate.
        let next = plant.step(&s, &idle(), &Wrench::default(), 0.02).state;
        let expected = crate::so3::integrate_rotation(&s.rotation, &next.omega, 0.02);
        assert_abs_diff_eq!(next.rotation.matrix(), expected.matrix(), epsilon = 1e-15);
        assert_abs_diff_eq!(next.omega.x, 1.0, epsilon = 1e-9);
        assert_eq!(next.position, s.position);
    }

    #[test]
    fn neutral_rest_is_fixed_point() {
        let plant = neutral_plant();
        let s = BodyState::default();
        let next = plant.step(&s, &idle(), &Wrench::default(), 0.02);
        assert!(!next.diverged);
        assert!((next.state.omega - s.omega).amax() < 1e-12);
        assert!((next.state.velocity - s.velocity).amax() < 1e-12);
        assert!((next.state.rotation.matrix() - s.rotation.matrix()).amax() < 1e-12);
    }

    #[test]
    fn external_wrench_enters_linearly() {
        let plant = neutral_plant();
        let ext = Wrench::new(Vector3::new(0.1, 0.0, 0.0), Vector3::new(0.0, 0.0, 0.01));
        let s = BodyState::default();
        let w = net_wrench(&s, &idle(), &plant.params, &plant.geom, &ext);
        assert_abs_diff_eq!(w.force.x, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(w.torque.z, 0.01, epsilon = 1e-12);
    }

    #[test]
    fn divergence_flag() {
        let plant = neutral_plant();
        let mut s = BodyState::default();
        s.velocity.x = 2e6;
        assert!(plant.step(&s, &idle(), &Wrench::default(), 0.02).diverged);
        s.velocity.x = f64::NAN;
        assert!(plant.step(&s, &idle(), &Wrench::default(), 0.02).diverged);
    }

    #[test]
    fn coriolis_does_no_work() {
        let plant = neutral_plant();
        let s = BodyState {
            velocity: Vector3::new(0.3, -0.2, 0.1),
            omega: Vector3::new(0.5, 1.0, -0.7),
            ..BodyState::default()
        };
        let c = coriolis_wrench(&s, &plant.params, &plant.geom);
        let power = c.force.dot(&s.velocity) + c.torque.dot(&s.omega);
        assert_abs_diff_eq!(power, 0.0, epsilon = 1e-15);
    }
}
