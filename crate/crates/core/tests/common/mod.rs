//! Checks shared by the integration tests and the acceptance report. Each
//! returns `Ok(detail)` or `Err(reason)`.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use blimp_invert::control::{
    deploy_rollout, roll_deviation, Controller, DeployScenario, MappingLayer, PdGains, PdStabilizer, RealDeltas,
};
use blimp_invert::dynamics::{neutral_extra_weight, BlimpParams, BodyState, MotorCommand, Plant, Wrench};
use blimp_invert::env::{reward_terms, EnvConfig, InvertEnv, RewardParams};
use blimp_invert::harness::{
    episodes_to_convergence, load_actor, run_grid, train, ControllerKind, GridCell, GridReport, GridSpec,
    RunConfig, SuccessCriterion, Variant,
};
use blimp_invert::so3::{
    euler_from_rotation, integrate_rotation, rotation_error, rotation_from_axis_angle, rotation_from_euler,
    EulerAngles, RotationMatrix,
};
use blimp_invert::td3::{
    actor_objective_gradient, clip_gradients, critic_mse_gradient, Agent, Batch, Mlp, OutputActivation, Td3Hyper,
    Transition, Workspace,
};
use nalgebra::{UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn artifacts() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../artifacts")
}

pub fn random_rotation(rng: &mut ChaCha8Rng) -> RotationMatrix {
    let q = UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    ));
    RotationMatrix::from_matrix_normalized(*q.to_rotation_matrix().matrix())
}

// ---------------------------------------------------------------- rotations

pub fn math_kernel() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_rt, mut worst_sym, mut worst_euler) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let r = random_rotation(&mut rng);
        let d = random_rotation(&mut rng);
        let e = rotation_error(&r, &d);
        let back = r.compose(&rotation_from_axis_angle(&e));
        worst_rt = worst_rt.max((back.matrix() - d.matrix()).amax());
        worst_sym = worst_sym.max((e.angle - rotation_error(&d, &r).angle).abs());
        let eu = EulerAngles::new(
            rng.random_range(-PI + 1e-3..PI),
            rng.random_range(-1.5..1.5),
            rng.random_range(-PI + 1e-3..PI),
        );
        let got = euler_from_rotation(&rotation_from_euler(&eu));
        worst_euler = worst_euler
            .max((got.roll - eu.roll).abs())
            .max((got.pitch - eu.pitch).abs())
            .max((got.yaw - eu.yaw).abs());
    }
    ensure(worst_rt < 1e-7, || format!("axis-angle round trip error {worst_rt:e}"))?;
    ensure(worst_sym < 1e-9, || format!("error-angle asymmetry {worst_sym:e}"))?;
    ensure(worst_euler < 1e-9, || format!("euler round trip error {worst_euler:e}"))?;

    let mut r = RotationMatrix::identity();
    let w = Vector3::new(0.7, -1.3, 2.1);
    for _ in 0..1_000_000 {
        r = integrate_rotation(&r, &w, 0.001);
    }
    let drift = r.orthonormality_error();
    ensure(drift < 1e-6, || format!("orthonormality drift {drift:e} after 1e6 steps"))?;
    Ok(format!(
        "1000 cases: round trip {worst_rt:.1e}, symmetry {worst_sym:.1e}, euler {worst_euler:.1e}; drift {drift:.1e} over 1e6 steps"
    ))
}

// ---------------------------------------------------------------- dynamics

pub fn neutral_plant(drag: bool) -> Plant {
    let mut p = BlimpParams::default();
    if !drag {
        p.inertia.drag_angular = [0.0; 3];
        p.inertia.drag_linear = [0.0; 3];
    }
    let w = neutral_extra_weight(&p);
    Plant::new(p.with_extra_weight(w)).unwrap()
}

pub fn equilibrium() -> Check {
    let p = BlimpParams::default();
    let neutral = neutral_extra_weight(&p);
    ensure((neutral - 0.02335).abs() <= 1e-4, || format!("neutral weight {neutral} kg"))?;
    ensure((p.mass.extra_weight - neutral).abs() <= 1e-4, || "default m_w is not neutral".into())?;

    let plant = neutral_plant(true);
    let idle = MotorCommand::zeros(plant.params.actuation.thrusters.len());
    let ext = Wrench::default();
    for r in [RotationMatrix::identity(), RotationMatrix::inverted()] {
        let s = BodyState::at_rest(r);
        let n = plant.step(&s, &idle, &ext, 0.02).state;
        let d = (n.rotation.matrix() - s.rotation.matrix())
            .amax()
            .max(n.omega.amax())
            .max(n.velocity.amax())
            .max(n.position.amax());
        ensure(d < 1e-9, || format!("rest pose moved by {d:e} in one step"))?;
    }

    // Upright: a 0.01 rad roll stays bounded and decays.
    let mut s = BodyState::at_rest(RotationMatrix::about_x(0.01));
    let (mut peak, mut late) = (0.0f64, 0.0f64);
    for k in 0..3000 {
        s = plant.step(&s, &idle, &ext, 0.02).state;
        let roll = euler_from_rotation(&s.rotation).roll.abs();
        peak = peak.max(roll);
        if k >= 2500 {
            late = late.max(roll);
        }
    }
    ensure(peak <= 0.01 + 1e-9 && late < 0.01, || format!("upright peak {peak}, late {late}"))?;

    // Inverted: a 0.01 rad roll grows past 0.5 rad.
    let mut s = BodyState::at_rest(RotationMatrix::inverted().compose(&RotationMatrix::about_x(0.01)));
    let mut escaped = None;
    for k in 0..3000 {
        s = plant.step(&s, &idle, &ext, 0.02).state;
        if roll_deviation(&s) > 0.5 {
            escaped = Some(k as f64 * 0.02);
            break;
        }
    }
    let escaped = escaped.ok_or("inverted pose did not repel a 0.01 rad perturbation")?;

    // Energy over 10 s without dissipation, compared in 2 s windows against
    // the swing energy.
    let plant = neutral_plant(false);
    let mut worst = 0.0f64;
    for phi0 in [0.3, 1.0, 2.0] {
        let mut s = BodyState::at_rest(RotationMatrix::about_x(phi0));
        let swing = plant.energy(&s) - plant.energy(&BodyState::default());
        let mut e = Vec::with_capacity(500);
        for _ in 0..500 {
            s = plant.step(&s, &idle, &ext, 0.02).state;
            e.push(plant.energy(&s));
        }
        let mean = |w: &[f64]| w.iter().sum::<f64>() / w.len() as f64;
        let first = mean(&e[..100]);
        for w in e.chunks(100) {
            worst = worst.max((mean(w) - first).abs() / swing);
        }
    }
    ensure(worst < 0.005, || format!("windowed energy drift {:.3}%", 100.0 * worst))?;
    Ok(format!(
        "neutral {:.2} g; fixed points hold; upright late peak {late:.4} rad; inverted escapes at {escaped:.2} s; energy drift {:.2}%",
        neutral * 1e3,
        100.0 * worst
    ))
}

// ---------------------------------------------------------------- reward

pub fn reward_fixtures() -> Check {
    let rp = RewardParams::default();
    let z = Vector3::zeros();
    let at = |r: RotationMatrix| reward_terms(&BodyState::at_rest(r), &z, &rp);
    let top = at(RotationMatrix::inverted()).total();
    ensure(top == 2.0, || format!("r at the inverted pose = {top}"))?;
    let up = at(RotationMatrix::identity()).rotation();
    ensure((up - (-5.0f64).exp()).abs() <= 1e-12, || format!("upright r_rot = {up}"))?;
    let near = |a: f64| at(RotationMatrix::inverted().compose(&RotationMatrix::about_x(a))).bonus;
    let below = near(rp.zeta - 1e-10);
    let at_zeta = near(rp.zeta);
    let above = near(rp.zeta + 1e-10);
    ensure(below.abs() < 1e-9 && at_zeta.abs() < 1e-9 && above == 0.0, || {
        format!("bonus around zeta: {below:e}, {at_zeta:e}, {above:e}")
    })?;
    Ok(format!("r(R_d) = 2, upright r_rot = exp(-5) {:+.1e}, bonus just below zeta {below:.1e}", up - (-5.0f64).exp()))
}

// ---------------------------------------------------------------- learning core

fn random_net(rng: &mut ChaCha8Rng, input: usize, output: usize, act: OutputActivation) -> Mlp<f64> {
    let depth = rng.random_range(1..=2);
    let mut sizes = vec![input];
    for _ in 0..depth {
        sizes.push(rng.random_range(3..=6));
    }
    sizes.push(output);
    let mut net = Mlp::new(&sizes, act, None, rng);
    // Keep tanh away from saturation and pre-activations away from kinks.
    for p in net.params_mut() {
        *p = *p * 0.8 + rng.random_range(-0.05..0.05);
    }
    net
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale < 1e-12 {
        diff
    } else {
        diff / scale
    }
}

fn fd_gradient(params: &[f64], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let h = 1e-6;
    let mut p = params.to_vec();
    (0..p.len())
        .map(|i| {
            let x = p[i];
            p[i] = x + h;
            let up = f(&p);
            p[i] = x - h;
            let down = f(&p);
            p[i] = x;
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn learning_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_c = 0.0f64;
    let mut worst_a = 0.0f64;
    let mut ws = Workspace::<f64>::default();
    for _ in 0..20 {
        let (od, ad) = (rng.random_range(2..=4), rng.random_range(1..=3));
        let m = rng.random_range(2..=5);
        let actor = random_net(&mut rng, od, ad, OutputActivation::Tanh);
        let critic = random_net(&mut rng, od + ad, 1, OutputActivation::Linear);
        let obs: Vec<f64> = (0..m * od).map(|_| rng.random_range(-1.0..1.0)).collect();
        let act: Vec<f64> = (0..m * ad).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();

        let mut g = Vec::new();
        critic_mse_gradient(&critic, &obs, &act, &y, &mut ws, &mut g);
        let fd = fd_gradient(critic.params(), |p| {
            let mut c = critic.clone();
            c.params_mut().copy_from_slice(p);
            critic_mse_gradient(&c, &obs, &act, &y, &mut Workspace::default(), &mut Vec::new())
        });
        worst_c = worst_c.max(rel_err(&g, &fd));

        actor_objective_gradient(&actor, &critic, &obs, &mut ws, &mut g);
        let fd = fd_gradient(actor.params(), |p| {
            let mut a = actor.clone();
            a.params_mut().copy_from_slice(p);
            -actor_objective_gradient(&a, &critic, &obs, &mut Workspace::default(), &mut Vec::new())
        });
        worst_a = worst_a.max(rel_err(&g, &fd));
    }
    ensure(worst_c < 1e-4, || format!("critic gradient rel err {worst_c:e}"))?;
    ensure(worst_a < 1e-4, || format!("actor gradient rel err {worst_a:e}"))?;
    td3_invariants()?;
    Ok(format!("20 nets: critic rel err {worst_c:.1e}, actor rel err {worst_a:.1e}; update invariants hold"))
}

fn scripted_batch(rng: &mut ChaCha8Rng, m: usize) -> Batch {
    let mut b = Batch::default();
    for i in 0..m {
        let v = |rng: &mut ChaCha8Rng| rng.random_range(-1.0f32..1.0);
        b.push(&Transition {
            obs: std::array::from_fn(|_| v(rng)),
            action: std::array::from_fn(|_| v(rng)),
            reward: v(rng),
            next_obs: std::array::from_fn(|_| v(rng)),
            done: i % 3 == 0,
        });
    }
    b
}

fn td3_invariants() -> Result<(), String> {
    let hyper = Td3Hyper { hidden: 16, policy_delay: 3, ..Td3Hyper::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut agent = Agent::new(&hyper, &mut rng);
    let gamma = hyper.gamma as f32;
    let mut y = Vec::new();
    for step in 1..=9u64 {
        let b = scripted_batch(&mut rng, 8);
        // Twin minimum.
        let (q1, q2) = agent.targets(&b, &hyper, &mut rng, &mut y);
        for i in 0..b.len() {
            let base = b.reward[i];
            let nd = b.not_done[i];
            ensure(y[i] <= base + gamma * nd * q1[i] + 1e-6 && y[i] <= base + gamma * nd * q2[i] + 1e-6, || {
                "target above an individual critic target".into()
            })?;
        }
        let before_actor = agent.nets.actor.clone();
        let before_target = agent.nets.critic1_target.clone();
        let online_prev = agent.nets.critic1.clone();
        agent.train_step(&b, &hyper, &mut rng);
        let updated = step % hyper.policy_delay as u64 == 0;
        ensure((agent.nets.actor != before_actor) == updated, || format!("actor update mismatch at step {step}"))?;
        if updated {
            // θ'_new - θ = (1 - τ)(θ'_old - θ) with θ the freshly updated critic.
            let tau = hyper.tau as f32;
            let online = agent.nets.critic1.params();
            for ((n, o), w) in agent.nets.critic1_target.params().iter().zip(before_target.params()).zip(online) {
                let expect = (1.0 - tau) * (o - w);
                ensure((n - w - expect).abs() <= 1e-6 * (1.0 + expect.abs()), || "soft update identity".into())?;
            }
            ensure(online_prev != agent.nets.critic1, || "critic did not move".into())?;
        } else {
            ensure(agent.nets.critic1_target == before_target, || "target moved between actor updates".into())?;
        }
    }
    let mut g = vec![0.5f32, -0.05, -3.0, 0.1, f32::MIN_POSITIVE];
    clip_gradients(&mut g, 0.1);
    ensure(g == [0.1, -0.05, -0.1, 0.1, f32::MIN_POSITIVE], || format!("clipping gave {g:?}"))?;
    Ok(())
}

// ---------------------------------------------------------------- controllers

/// PD from small tilts about random axes with small rates.
pub fn pd_holds(max_tilt: f64, max_rate: f64, cases: usize, seed: u64) -> Result<f64, String> {
    let cfg = EnvConfig { terminate_over_range: false, ..EnvConfig::default() };
    let mut env = InvertEnv::new(BlimpParams::default(), cfg).unwrap();
    let mut pd = PdStabilizer::new(PdGains::default(), env.torque_scale()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let axis = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            .normalize();
        let tilt = rotation_from_axis_angle(&blimp_invert::so3::AxisAngle { axis, angle: rng.random_range(0.0..=max_tilt) });
        let mut s = BodyState::at_rest(RotationMatrix::inverted().compose(&tilt));
        let dir = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        s.omega = dir.normalize() * rng.random_range(0.0..=max_rate);
        env.reset(1.0, 0.0).unwrap();
        env.reset_state(s);
        for _ in 0..300 {
            let a = pd.act(env.state(), env.time());
            env.step(&a);
            let d = roll_deviation(env.state());
            worst = worst.max(d);
            ensure(d < 0.3, || format!("PD lost the pose (dev {d:.3}) from tilt about {axis:?}"))?;
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------- trained artifacts

pub fn run_dir(variant: Variant, seed: u64) -> PathBuf {
    artifacts().join(format!("ablation/{}/s{seed}", variant.name()))
}

pub fn policy_path(seed: u64) -> PathBuf {
    run_dir(Variant::Full, seed).join("policy.bin")
}

pub fn nominal_success(seed: u64) -> Result<(bool, Option<f64>), String> {
    let actor = load_actor(policy_path(seed)).map_err(|e| e.to_string())?;
    let cfg = RunConfig {
        grid: GridSpec { preset: None, cells: vec![GridCell::NOMINAL], baseline: false, ..GridSpec::default() },
        ..RunConfig::default()
    };
    let r = run_grid(&cfg, Some(&actor), 1).map_err(|e| e.to_string())?;
    let v = r.verdict(ControllerKind::Policy, &GridCell::NOMINAL).ok_or("missing nominal verdict")?;
    let times: Vec<f64> = r.rows.iter().filter_map(|x| x.time_to_inversion).collect();
    let t = (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64);
    Ok((v.success, t))
}

/// Reruns the first `n` episodes of a committed training log.
pub fn reproduces_log_prefix(seed: u64, variant: Variant, log: &str, n: usize) -> Result<(), String> {
    let mut cfg = RunConfig { checkpoint_every: 0, ..RunConfig::default() };
    cfg.td3 = variant.apply(&cfg.td3);
    cfg.td3.episodes = n;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    train(&cfg, seed, dir.path(), None).map_err(|e| e.to_string())?;
    let fresh = std::fs::read_to_string(dir.path().join("train_log.csv")).map_err(|e| e.to_string())?;
    let want: Vec<&str> = log.lines().take(n + 1).collect();
    let got: Vec<&str> = fresh.lines().collect();
    ensure(want == got, || format!("{} seed {seed}: log prefix differs", variant.name()))
}

pub fn best_seed() -> Result<u64, String> {
    let mut best: Option<(u64, f64)> = None;
    for s in 0..3 {
        if let Ok((true, Some(t))) = nominal_success(s) {
            if best.is_none_or(|(_, bt)| t < bt) {
                best = Some((s, t));
            }
        }
    }
    best.map(|(s, _)| s).ok_or_else(|| "no trained seed succeeds at the nominal cell".into())
}

pub fn full_grid(seed: u64, baseline: bool) -> Result<GridReport, String> {
    let actor = load_actor(policy_path(seed)).map_err(|e| e.to_string())?;
    let cfg = RunConfig { grid: GridSpec { baseline, ..GridSpec::default() }, ..RunConfig::default() };
    run_grid(&cfg, Some(&actor), 1).map_err(|e| e.to_string())
}

pub fn deploy(seed: u64, roll_scale: f64, top: f64, bottom: f64) -> Result<(bool, Option<f64>), String> {
    let actor = load_actor(policy_path(seed)).map_err(|e| e.to_string())?;
    let cfg = RunConfig::default();
    let sc = DeployScenario {
        mapping: MappingLayer { scale: [roll_scale, 0.1, 0.1], ..MappingLayer::default() },
        real: RealDeltas { top_weight: top, bottom_weight: bottom, ..RealDeltas::default() },
        ..DeployScenario::default()
    };
    let o = deploy_rollout(&actor, &sc, &BlimpParams::default(), &cfg.eval_env(), &SuccessCriterion::default())
        .map_err(|e| e.to_string())?;
    Ok((o.verdict.success, o.verdict.time_to_inversion))
}

pub fn convergence(returns: &[f64]) -> Option<usize> {
    let spec = blimp_invert::harness::AblationSpec::default();
    episodes_to_convergence(returns, spec.window, spec.threshold)
}
