//! Quadratic motor thrust curve and its inverse.
//!
//! Commands are signed: the sign selects the thrust direction of a
//! reversible propeller and the magnitude feeds the curve.

const A2: f64 = -0.0292;
const A1: f64 = 0.1118;
const A0: f64 = -0.0039;

fn curve(eta: f64) -> f64 {
    (A2 * eta + A1) * eta + A0
}

/// Thrust in N for a signed command `eta ∈ [-1, 1]`.
pub fn motor_force(eta: f64, gain: f64) -> f64 {
    let f = (gain * curve(eta.abs().min(1.0))).max(0.0);
    if eta < 0.0 {
        -f
    } else {
        f
    }
}

/// Command magnitude where the curve crosses zero.
pub fn dead_band() -> f64 {
    let disc = A1 * A1 - 4.0 * A2 * A0;
    // Stable root of A2 x² + A1 x + A0 = 0 near zero.
    2.0 * -A0 / (A1 + disc.sqrt())
}

/// Largest thrust the motor produces (at |eta| = 1).
pub fn max_force(gain: f64) -> f64 {
    gain * curve(1.0)
}

/// Inverse of [`motor_force`] on the attainable range; saturates at ±1.
pub fn command_from_force(force: f64, gain: f64) -> f64 {
    let mag = force.abs();
    if mag == 0.0 {
        return 0.0;
    }
    if mag >= max_force(gain) {
        return 1.0f64.copysign(force);
    }
    // Solve A2 x² + A1 x + (A0 - F/g) = 0 for the root on [dead_band, 1],
    // written in the cancellation-free form 2c / (-b - sqrt(disc)).
    let c = A0 - mag / gain;
    let disc = A1 * A1 - 4.0 * A2 * c;
    let eta = 2.0 * -c / (A1 + disc.sqrt());
    eta.clamp(0.0, 1.0).copysign(force)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_command_in_dead_band() {
        assert_eq!(motor_force(0.0, 1.7), 0.0);
        assert_eq!(motor_force(0.02, 1.7), 0.0);
        assert_eq!(motor_force(-0.02, 1.7), 0.0);
    }

    #[test]
    fn curve_fixtures() {
        assert_abs_diff_eq!(motor_force(1.0, 1.7), 0.133790, epsilon = 1e-12);
        assert_abs_diff_eq!(motor_force(0.5, 1.7), 0.075990, epsilon = 1e-12);
        assert_abs_diff_eq!(motor_force(-0.5, 1.7), -0.075990, epsilon = 1e-12);
    }

    #[test]
    fn dead_band_is_root() {
        assert_abs_diff_eq!(curve(dead_band()), 0.0, epsilon = 1e-15);
        assert!(dead_band() > 0.03 && dead_band() < 0.04);
    }

    #[test]
    fn inverse_fixtures() {
        assert_eq!(command_from_force(0.0, 1.7), 0.0);
        assert_abs_diff_eq!(command_from_force(0.133790, 1.7), 1.0, epsilon = 1e-9);
        assert_eq!(command_from_force(10.0, 1.7), 1.0);
        assert_eq!(command_from_force(-10.0, 1.7), -1.0);
    }

    proptest! {
        #[test]
        fn round_trip_on_attainable_range(frac in 1e-6f64..1.0, gain in 0.5f64..2.5, neg: bool) {
            let f = frac * max_force(gain) * if neg { -1.0 } else { 1.0 };
            let eta = command_from_force(f, gain);
            prop_assert!(eta.abs() <= 1.0);
            prop_assert!(eta.abs() >= dead_band() - 1e-12);
            prop_assert!((motor_force(eta, gain) - f).abs() < 1e-14);
        }

        #[test]
        fn monotone_on_unit_interval(a in 0.0f64..1.0, b in 0.0f64..1.0, gain in 0.5f64..2.5) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(motor_force(lo, gain) <= motor_force(hi, gain));
        }
    }
}
