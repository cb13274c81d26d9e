//! Axis-angle error from a few attitudes to the inverted target pose.
use blimp_invert::so3::{euler_from_rotation, rotation_error, RotationMatrix};

fn main() {
    let target = RotationMatrix::inverted();
    let poses = [
        ("upright", RotationMatrix::identity()),
        ("rolled 90 deg", RotationMatrix::about_x(std::f64::consts::FRAC_PI_2)),
        ("0.2 rad short of inverted", RotationMatrix::about_x(std::f64::consts::PI - 0.2)),
        ("inverted", target),
    ];
    for (name, r) in poses {
        let e = rotation_error(&r, &target);
        let eu = euler_from_rotation(&r);
        println!(
            "{name:28} roll {:+.3}  error angle {:.3} rad about [{:+.2} {:+.2} {:+.2}]",
            eu.roll, e.angle, e.axis.x, e.axis.y, e.axis.z
        );
    }
}
