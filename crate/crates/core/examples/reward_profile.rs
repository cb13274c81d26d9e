//! Reward along a pure roll from upright to inverted.
use blimp_invert::dynamics::BodyState;
use blimp_invert::env::{reward_terms, RewardParams};
use blimp_invert::so3::RotationMatrix;
use nalgebra::Vector3;

fn main() {
    let rp = RewardParams::default();
    for i in 0..=12 {
        let dev = std::f64::consts::PI * (1.0 - i as f64 / 12.0);
        let s = BodyState::at_rest(RotationMatrix::inverted().compose(&RotationMatrix::about_x(dev)));
        let r = reward_terms(&s, &Vector3::zeros(), &rp);
        println!("deviation {dev:.3}  orientation {:.4}  bonus {:.4}  total {:.4}", r.orientation, r.bonus, r.total());
    }
}
