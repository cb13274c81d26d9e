//! The trimmed blimp left alone: a small roll decays when upright and grows
//! when inverted.
use blimp_invert::control::roll_deviation;
use blimp_invert::dynamics::{neutral_extra_weight, BlimpParams, BodyState, MotorCommand, Plant, Wrench};
use blimp_invert::so3::{euler_from_rotation, RotationMatrix};

fn main() -> blimp_invert::Result<()> {
    let base = BlimpParams::default();
    let m_w = neutral_extra_weight(&base);
    println!("neutral trim weight {:.2} g", m_w * 1e3);
    let plant = Plant::new(base.with_extra_weight(m_w))?;
    let idle = MotorCommand::zeros(plant.params.actuation.thrusters.len());

    let mut up = BodyState::at_rest(RotationMatrix::about_x(0.01));
    let mut inv = BodyState::at_rest(RotationMatrix::inverted().compose(&RotationMatrix::about_x(0.01)));
    for k in 1..=250 {
        up = plant.step(&up, &idle, &Wrench::default(), 0.02).state;
        inv = plant.step(&inv, &idle, &Wrench::default(), 0.02).state;
        if k % 25 == 0 {
            println!(
                "t {:4.1} s  upright roll {:+.5}  inverted deviation {:.4}",
                k as f64 * 0.02,
                euler_from_rotation(&up.rotation).roll,
                roll_deviation(&inv)
            );
        }
    }
    Ok(())
}
