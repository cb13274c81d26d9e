//! Actor, twin critics, their targets and optimizers, and one TD3 update.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::buffer::Batch;
use super::mlp::{Mlp, OutputActivation, Scalar, Tape};
use super::optim::{clip_gradients, Adam};
use super::Td3Hyper;
use crate::env::{ACT_DIM, OBS_DIM};

const CRITIC_IN: usize = OBS_DIM + ACT_DIM;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Losses {
    pub critic1: f32,
    pub critic2: f32,
    /// Mean Q₁(s, π(s)) when the actor was updated on this step.
    pub actor_q: Option<f32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Networks {
    pub actor: Mlp<f32>,
    pub critic1: Mlp<f32>,
    pub critic2: Mlp<f32>,
    pub actor_target: Mlp<f32>,
    pub critic1_target: Mlp<f32>,
    pub critic2_target: Mlp<f32>,
}

impl Networks {
    pub fn new<R: Rng + ?Sized>(hyper: &Td3Hyper, rng: &mut R) -> Self {
        let h = hyper.hidden;
        let actor = Mlp::new(
            &[OBS_DIM, h, h, ACT_DIM],
            OutputActivation::Tanh,
            Some(hyper.actor_final_init),
            rng,
        );
        let critic1 = Mlp::new(&[CRITIC_IN, h, h, 1], OutputActivation::Linear, None, rng);
        let critic2 = Mlp::new(&[CRITIC_IN, h, h, 1], OutputActivation::Linear, None, rng);
        Self {
            actor_target: actor.clone(),
            critic1_target: critic1.clone(),
            critic2_target: critic2.clone(),
            actor,
            critic1,
            critic2,
        }
    }

    pub fn is_finite(&self) -> bool {
        [
            &self.actor,
            &self.critic1,
            &self.critic2,
            &self.actor_target,
            &self.critic1_target,
            &self.critic2_target,
        ]
        .iter()
        .all(|n| n.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimizers {
    pub actor: Adam<f32>,
    pub critic1: Adam<f32>,
    pub critic2: Adam<f32>,
}

/// Reusable buffers for the gradient routines.
#[derive(Debug, Clone, Default)]
pub struct Workspace<T> {
    tape_a: Tape<T>,
    tape_c: Tape<T>,
    critic_in: Vec<T>,
    d_out: Vec<T>,
    d_in: Vec<T>,
    d_act: Vec<T>,
    grad_unused: Vec<T>,
}

/// Reusable buffers for one update; not part of the persistent state.
#[derive(Debug, Clone, Default)]
struct Scratch {
    ws: Workspace<f32>,
    target: Vec<f32>,
    grad_actor: Vec<f32>,
    grad_critic: Vec<f32>,
}

/// Rows `[s | a]` of a critic input.
fn concat_rows<T: Scalar>(obs: &[T], obs_dim: usize, act: &[T], act_dim: usize, out: &mut Vec<T>) {
    out.clear();
    for (s, a) in obs.chunks_exact(obs_dim).zip(act.chunks_exact(act_dim)) {
        out.extend_from_slice(s);
        out.extend_from_slice(a);
    }
}

/// Loss `(1/M) Σ (Q(s, a) - y)²` over `M = target.len()` rows; writes its
/// gradient with respect to the critic parameters into `grads`.
pub fn critic_mse_gradient<T: Scalar>(
    critic: &Mlp<T>,
    obs: &[T],
    act: &[T],
    target: &[T],
    ws: &mut Workspace<T>,
    grads: &mut Vec<T>,
) -> T {
    let m = target.len();
    let act_dim = act.len() / m;
    concat_rows(obs, obs.len() / m, act, act_dim, &mut ws.critic_in);
    let q = critic.forward(&ws.critic_in, m, &mut ws.tape_c);
    let scale = T::of(2.0 / m as f64);
    ws.d_out.clear();
    let mut loss = T::zero();
    for (q, y) in q.iter().zip(target) {
        let e = *q - *y;
        loss = loss + e * e;
        ws.d_out.push(scale * e);
    }
    grads.resize(critic.num_params(), T::zero());
    critic.backward(&mut ws.tape_c, &ws.d_out, grads, None);
    loss / T::of(m as f64)
}

/// Objective `-(1/M) Σ Q(s, π(s))` for the actor; writes its gradient with
/// respect to the actor parameters into `grads` and returns the mean Q.
pub fn actor_objective_gradient<T: Scalar>(
    actor: &Mlp<T>,
    critic: &Mlp<T>,
    obs: &[T],
    ws: &mut Workspace<T>,
    grads: &mut Vec<T>,
) -> T {
    let obs_dim = actor.input_dim();
    let act_dim = actor.output_dim();
    let m = obs.len() / obs_dim;
    let actions = actor.forward(obs, m, &mut ws.tape_a).to_vec();
    concat_rows(obs, obs_dim, &actions, act_dim, &mut ws.critic_in);
    let q = critic.forward(&ws.critic_in, m, &mut ws.tape_c);
    let mean_q = q.iter().fold(T::zero(), |a, b| a + *b) / T::of(m as f64);
    ws.d_out.clear();
    ws.d_out.resize(m, -T::one() / T::of(m as f64));
    ws.grad_unused.resize(critic.num_params(), T::zero());
    critic.backward(&mut ws.tape_c, &ws.d_out, &mut ws.grad_unused, Some(&mut ws.d_in));
    ws.d_act.clear();
    for row in ws.d_in.chunks_exact(obs_dim + act_dim) {
        ws.d_act.extend_from_slice(&row[obs_dim..]);
    }
    grads.resize(actor.num_params(), T::zero());
    actor.backward(&mut ws.tape_a, &ws.d_act, grads, None);
    mean_q
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Agent {
    pub nets: Networks,
    pub opts: Optimizers,
    /// Completed calls to [`Agent::train_step`].
    pub updates: u64,
    #[serde(skip)]
    scratch: Scratch,
}

impl PartialEq for Agent {
    fn eq(&self, other: &Self) -> bool {
        self.nets == other.nets && self.opts == other.opts && self.updates == other.updates
    }
}

impl Agent {
    pub fn new<R: Rng + ?Sized>(hyper: &Td3Hyper, rng: &mut R) -> Self {
        let nets = Networks::new(hyper, rng);
        let opts = Optimizers {
            actor: Adam::new(nets.actor.num_params(), hyper.lr_actor),
            critic1: Adam::new(nets.critic1.num_params(), hyper.lr_critic),
            critic2: Adam::new(nets.critic2.num_params(), hyper.lr_critic),
        };
        Self {
            nets,
            opts,
            updates: 0,
            scratch: Scratch::default(),
        }
    }

    /// Deterministic policy output for one observation.
    pub fn act(&self, obs: &[f32; OBS_DIM]) -> [f32; ACT_DIM] {
        let y = self.nets.actor.predict(obs, 1);
        [y[0], y[1], y[2]]
    }

    /// Per-sample targets `r + γ (1 - d) min_j Q'_j(s', π'(s'))`, written
    /// into `out`. Also returns the two individual target values.
    pub fn targets<R: Rng + ?Sized>(
        &mut self,
        batch: &Batch,
        hyper: &Td3Hyper,
        rng: &mut R,
        out: &mut Vec<f32>,
    ) -> (Vec<f32>, Vec<f32>) {
        let m = batch.len();
        let sc = &mut self.scratch.ws;
        let mut next_act = self.nets.actor_target.predict(&batch.next_obs, m);
        if hyper.target_noise > 0.0 {
            let normal = Normal::new(0.0, hyper.target_noise).expect("valid deviation");
            let c = hyper.target_noise_clip;
            for a in &mut next_act {
                let eps = normal.sample(rng).clamp(-c, c) as f32;
                *a = (*a + eps).clamp(-1.0, 1.0);
            }
        }
        concat_rows(&batch.next_obs, OBS_DIM, &next_act, ACT_DIM, &mut sc.critic_in);
        let q1 = self.nets.critic1_target.predict(&sc.critic_in, m);
        let q2 = self.nets.critic2_target.predict(&sc.critic_in, m);
        let gamma = hyper.gamma as f32;
        out.clear();
        out.extend((0..m).map(|i| batch.reward[i] + gamma * batch.not_done[i] * q1[i].min(q2[i])));
        (q1, q2)
    }

    pub fn train_step<R: Rng + ?Sized>(&mut self, batch: &Batch, hyper: &Td3Hyper, rng: &mut R) -> Losses {
        let m = batch.len();
        assert!(m > 0, "empty batch");
        let mut target = std::mem::take(&mut self.scratch.target);
        self.targets(batch, hyper, rng, &mut target);

        let critic1 = self.critic_update(batch, &target, hyper, true);
        let critic2 = self.critic_update(batch, &target, hyper, false);
        self.scratch.target = target;
        self.updates += 1;

        let mut losses = Losses {
            critic1,
            critic2,
            actor_q: None,
        };
        if self.updates.is_multiple_of(hyper.policy_delay as u64) {
            losses.actor_q = Some(self.actor_update(batch, hyper));
            let rate = hyper.tau as f32;
            let n = &mut self.nets;
            n.actor_target.soft_update_from(&n.actor, rate);
            n.critic1_target.soft_update_from(&n.critic1, rate);
            n.critic2_target.soft_update_from(&n.critic2, rate);
        }
        losses
    }

    /// One optimizer step on the mean squared TD error; returns the loss.
    fn critic_update(&mut self, batch: &Batch, target: &[f32], hyper: &Td3Hyper, first: bool) -> f32 {
        let sc = &mut self.scratch;
        let (net, opt) = if first {
            (&mut self.nets.critic1, &mut self.opts.critic1)
        } else {
            (&mut self.nets.critic2, &mut self.opts.critic2)
        };
        let loss = critic_mse_gradient(net, &batch.obs, &batch.action, target, &mut sc.ws, &mut sc.grad_critic);
        if hyper.clip_gradients {
            clip_gradients(&mut sc.grad_critic, hyper.clip_critic as f32);
        }
        opt.step(net.params_mut(), &sc.grad_critic);
        loss
    }

    /// Ascends mean Q₁(s, π(s)); returns that mean before the step.
    fn actor_update(&mut self, batch: &Batch, hyper: &Td3Hyper) -> f32 {
        let sc = &mut self.scratch;
        let mean_q = actor_objective_gradient(&self.nets.actor, &self.nets.critic1, &batch.obs, &mut sc.ws, &mut sc.grad_actor);
        if hyper.clip_gradients {
            clip_gradients(&mut sc.grad_actor, hyper.clip_actor as f32);
        }
        self.opts.actor.step(self.nets.actor.params_mut(), &sc.grad_actor);
        mean_q
    }
}
