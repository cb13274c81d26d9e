//! The energy-shaping baseline inverting the nominal blimp.
use blimp_invert::control::{EnergyShaping, EnergyShapingGains};
use blimp_invert::dynamics::BlimpParams;
use blimp_invert::env::{EnvConfig, InvertEnv};
use blimp_invert::harness::{rollout, SuccessCriterion};

fn main() -> blimp_invert::Result<()> {
    let base = BlimpParams::default();
    let cfg = EnvConfig { terminate_over_range: false, ..EnvConfig::default() };
    let mut env = InvertEnv::new(base.clone(), cfg)?;
    let mut c = EnergyShaping::new(&base, EnergyShapingGains::default(), env.torque_scale())?;
    let records = rollout(&mut env, &mut c, base, 0.0, 30.0)?;
    for r in records.iter().step_by(20) {
        println!("t {:5.1}  roll {:+.3}  pitch {:+.3}  omega_x {:+.3}", r.t, r.euler[0], r.euler[1], r.omega[0]);
    }
    let v = SuccessCriterion::default().judge_records(&records);
    println!("success {} time to inversion {:?}", v.success, v.time_to_inversion);
    Ok(())
}
