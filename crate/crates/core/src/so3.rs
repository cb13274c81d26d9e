//! Rotation matrices, axis-angle orientation error and body-rate integration.
//!
//! Attitude is carried as a body-to-world rotation matrix everywhere in the
//! crate. Euler angles use the Z-Y-X intrinsic sequence (yaw, then pitch,
//! then roll), so `R = Rz(yaw) * Ry(pitch) * Rx(roll)`.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

/// `sin(angle)` below this value selects the singular branches of the
/// axis extraction.
pub const SIN_TOLERANCE: f64 = 1e-6;

/// Pitch within this distance of ±π/2 is treated as gimbal lock.
pub const GIMBAL_TOLERANCE: f64 = 1e-6;

/// A proper rotation matrix (orthonormal, determinant +1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationMatrix(Matrix3<f64>);

impl RotationMatrix {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Wraps a matrix without checking it. Callers own the invariant.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    /// Builds a rotation from a nearly orthonormal matrix by projecting it
    /// back onto SO(3).
    pub fn from_matrix_normalized(m: Matrix3<f64>) -> Self {
        Self(orthonormalize(m))
    }

    /// Rotation by `angle` radians about the world/body x axis.
    pub fn about_x(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c))
    }

    pub fn about_y(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c))
    }

    pub fn about_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
    }

    /// The inverted target attitude `diag(1, -1, -1)`.
    pub fn inverted() -> Self {
        Self(Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0)))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn compose(&self, rhs: &RotationMatrix) -> Self {
        Self(self.0 * rhs.0)
    }

    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    /// Maps a world-frame vector into the body frame.
    pub fn inverse_rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0.tr_mul(v)
    }

    /// Largest entry of `RᵀR - I`.
    pub fn orthonormality_error(&self) -> f64 {
        (self.0.transpose() * self.0 - Matrix3::identity()).amax()
    }

    /// Row-major copy of the nine entries.
    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.0;
        [
            m[(0, 0)],
            m[(0, 1)],
            m[(0, 2)],
            m[(1, 0)],
            m[(1, 1)],
            m[(1, 2)],
            m[(2, 0)],
            m[(2, 1)],
            m[(2, 2)],
        ]
    }

    pub fn from_row_major(v: &[f64]) -> Self {
        Self(Matrix3::from_row_slice(&v[..9]))
    }
}

impl Default for RotationMatrix {
    fn default() -> Self {
        Self::identity()
    }
}

/// Axis-angle pair with `angle ∈ [0, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAngle {
    pub axis: Vector3<f64>,
    pub angle: f64,
}

/// Roll, pitch and yaw in radians (Z-Y-X intrinsic).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EulerAngles {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl EulerAngles {
    pub fn new(roll: f64, pitch: f64, yaw: f64) -> Self {
        Self { roll, pitch, yaw }
    }
}

/// One Newton step of the polar decomposition, `R (3I - RᵀR) / 2`, repeated
/// until the error is at rounding level. Falls back to Gram-Schmidt when the
/// input is far from orthonormal.
pub fn orthonormalize(m: Matrix3<f64>) -> Matrix3<f64> {
    let mut r = m;
    if (r.transpose() * r - Matrix3::identity()).amax() > 1e-3 {
        r = gram_schmidt(&r);
    }
    for _ in 0..3 {
        let e = r.transpose() * r;
        if (e - Matrix3::identity()).amax() < 1e-15 {
            break;
        }
        r = r * (Matrix3::identity() * 3.0 - e) * 0.5;
    }
    r
}

fn gram_schmidt(m: &Matrix3<f64>) -> Matrix3<f64> {
    let x = m.column(0).normalize();
    let y = (m.column(1) - x * x.dot(&m.column(1))).normalize();
    let z = x.cross(&y);
    Matrix3::from_columns(&[x, y, z])
}

pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Closed-form exponential of `[w]×` (Rodrigues).
pub fn exp_so3(w: &Vector3<f64>) -> Matrix3<f64> {
    let angle = w.norm();
    if angle == 0.0 {
        return Matrix3::identity();
    }
    let k = skew(&(w / angle));
    let (s, c) = angle.sin_cos();
    Matrix3::identity() + k * s + k * k * (1.0 - c)
}

pub fn rotation_from_axis_angle(aa: &AxisAngle) -> RotationMatrix {
    RotationMatrix(orthonormalize(exp_so3(&(aa.axis * aa.angle))))
}

/// Axis-angle of the error rotation `Rᵀ R_d`.
///
/// The axis is `[1, 0, 0]` when the angle is zero, and is taken from the
/// symmetric part `R_e + I` when the angle is π.
pub fn rotation_error(current: &RotationMatrix, desired: &RotationMatrix) -> AxisAngle {
    let re = current.0.transpose() * desired.0;
    let cos = ((re.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let angle = cos.acos();
    let sin = angle.sin();
    if sin >= SIN_TOLERANCE {
        let axis = Vector3::new(
            re[(2, 1)] - re[(1, 2)],
            re[(0, 2)] - re[(2, 0)],
            re[(1, 0)] - re[(0, 1)],
        ) / (2.0 * sin);
        return AxisAngle {
            axis: axis.normalize(),
            angle,
        };
    }
    if cos > 0.0 {
        return AxisAngle {
            axis: Vector3::x(),
            angle,
        };
    }
    // R_e + I = 2 v vᵀ at angle π: take the column with the largest norm.
    let sym = (re + re.transpose()) * 0.5 + Matrix3::identity();
    let col = (0..3)
        .max_by(|&a, &b| {
            sym.column(a)
                .norm_squared()
                .total_cmp(&sym.column(b).norm_squared())
        })
        .unwrap_or(0);
    let mut axis: Vector3<f64> = sym.column(col).normalize();
    if axis[col] < 0.0 {
        axis = -axis;
    }
    AxisAngle { axis, angle }
}

fn wrap_half_open(angle: f64) -> f64 {
    // (-π, π]
    if angle <= -PI {
        angle + 2.0 * PI
    } else {
        angle
    }
}

pub fn euler_from_rotation(r: &RotationMatrix) -> EulerAngles {
    let m = &r.0;
    let pitch = (-m[(2, 0)]).clamp(-1.0, 1.0).asin();
    if (pitch.abs() - PI / 2.0).abs() < GIMBAL_TOLERANCE {
        // Yaw and roll share one degree of freedom; fold it into roll.
        let roll = wrap_half_open((-m[(1, 2)]).atan2(m[(1, 1)]));
        return EulerAngles::new(roll, pitch, 0.0);
    }
    let roll = wrap_half_open(m[(2, 1)].atan2(m[(2, 2)]));
    let yaw = wrap_half_open(m[(1, 0)].atan2(m[(0, 0)]));
    EulerAngles::new(roll, pitch, yaw)
}

pub fn rotation_from_euler(e: &EulerAngles) -> RotationMatrix {
    RotationMatrix::about_z(e.yaw)
        .compose(&RotationMatrix::about_y(e.pitch))
        .compose(&RotationMatrix::about_x(e.roll))
}

/// Advances `R` by a constant body rate: `R · exp([ω dt]×)`.
pub fn integrate_rotation(r: &RotationMatrix, omega: &Vector3<f64>, dt: f64) -> RotationMatrix {
    let w = omega * dt;
    if w.norm() == 0.0 {
        return *r;
    }
    RotationMatrix(orthonormalize(r.0 * exp_so3(&w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_error_uses_x_axis() {
        let aa = rotation_error(&RotationMatrix::identity(), &RotationMatrix::identity());
        assert_eq!(aa.angle, 0.0);
        assert_eq!(aa.axis, Vector3::x());
    }

    #[test]
    fn half_turn_error_from_symmetric_part() {
        let aa = rotation_error(&RotationMatrix::identity(), &RotationMatrix::inverted());
        assert_abs_diff_eq!(aa.angle, PI, epsilon = 1e-12);
        assert_abs_diff_eq!(aa.axis, Vector3::x(), epsilon = 1e-12);

        let aa = rotation_error(&RotationMatrix::identity(), &RotationMatrix::about_y(PI));
        assert_abs_diff_eq!(aa.axis, Vector3::y(), epsilon = 1e-12);
    }

    #[test]
    fn quarter_turn_about_z() {
        let aa = rotation_error(
            &RotationMatrix::identity(),
            &RotationMatrix::about_z(PI / 2.0),
        );
        assert_abs_diff_eq!(aa.angle, PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(aa.axis, Vector3::z(), epsilon = 1e-12);
    }

    #[test]
    fn euler_fixtures() {
        let e = euler_from_rotation(&RotationMatrix::identity());
        assert_eq!(e, EulerAngles::new(0.0, 0.0, 0.0));

        let e = euler_from_rotation(&RotationMatrix::inverted());
        assert_abs_diff_eq!(e.roll, PI, epsilon = 1e-12);
        assert_abs_diff_eq!(e.pitch, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.yaw, 0.0, epsilon = 1e-12);

        let e = euler_from_rotation(&RotationMatrix::about_z(PI / 2.0));
        assert_abs_diff_eq!(e.roll, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.yaw, PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn euler_gimbal_lock_folds_into_roll() {
        let r = rotation_from_euler(&EulerAngles::new(0.3, PI / 2.0, 0.2));
        let e = euler_from_rotation(&r);
        assert_eq!(e.yaw, 0.0);
        assert_abs_diff_eq!(e.pitch, PI / 2.0, epsilon = 1e-6);
        let back = rotation_from_euler(&e);
        assert_abs_diff_eq!(back.matrix(), r.matrix(), epsilon = 1e-6);
    }

    #[test]
    fn euler_roll_never_returns_minus_pi() {
        let mut m = *RotationMatrix::inverted().matrix();
        m[(2, 1)] = -0.0;
        let e = euler_from_rotation(&RotationMatrix::from_matrix_unchecked(m));
        assert_eq!(e.roll, PI);
    }

    #[test]
    fn integrate_zero_rate_is_noop() {
        let r = integrate_rotation(&RotationMatrix::identity(), &Vector3::zeros(), 0.02);
        assert_eq!(r, RotationMatrix::identity());
    }

    #[test]
    fn integrate_half_turn() {
        let r = integrate_rotation(&RotationMatrix::identity(), &Vector3::new(PI, 0.0, 0.0), 1.0);
        assert_abs_diff_eq!(r.matrix(), RotationMatrix::inverted().matrix(), epsilon = 1e-12);
    }

    #[test]
    fn integrate_composition_matches_single_step() {
        let w = Vector3::new(0.1, 0.0, 0.0);
        let mut r = RotationMatrix::identity();
        for _ in 0..100 {
            r = integrate_rotation(&r, &w, 0.1);
        }
        let once = integrate_rotation(&RotationMatrix::identity(), &w, 10.0);
        assert_abs_diff_eq!(r.matrix(), once.matrix(), epsilon = 1e-9);
    }

    #[test]
    fn orthonormalize_repairs_perturbed_matrix() {
        let mut m = *RotationMatrix::about_x(0.4).matrix();
        m[(0, 1)] += 1e-4;
        let r = RotationMatrix::from_matrix_normalized(m);
        assert!(r.orthonormality_error() < 1e-12);
        assert_abs_diff_eq!(r.matrix().determinant(), 1.0, epsilon = 1e-12);
    }
}
