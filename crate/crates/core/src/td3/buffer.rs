//! Ring-buffer experience replay, one buffer per weight split.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{ACT_DIM, OBS_DIM};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub obs: [f32; OBS_DIM],
    pub action: [f32; ACT_DIM],
    pub reward: f32,
    pub next_obs: [f32; OBS_DIM],
    /// Bootstrapping is masked when set.
    pub done: bool,
}

/// Fixed-capacity ring buffer stored column-wise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayBuffer {
    capacity: usize,
    lambda: f64,
    len: usize,
    cursor: usize,
    obs: Vec<f32>,
    action: Vec<f32>,
    reward: Vec<f32>,
    next_obs: Vec<f32>,
    not_done: Vec<f32>,
    /// λ the plant had when each slot was written.
    source: Vec<f64>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, lambda: f64) -> Self {
        Self {
            capacity,
            lambda,
            len: 0,
            cursor: 0,
            obs: Vec::new(),
            action: Vec::new(),
            reward: Vec::new(),
            next_obs: Vec::new(),
            not_done: Vec::new(),
            source: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// λ recorded with every stored transition, in slot order.
    pub fn sources(&self) -> &[f64] {
        &self.source
    }

    pub fn push(&mut self, t: &Transition, lambda: f64) {
        let i = self.cursor;
        if self.len < self.capacity {
            self.obs.extend_from_slice(&t.obs);
            self.action.extend_from_slice(&t.action);
            self.reward.push(t.reward);
            self.next_obs.extend_from_slice(&t.next_obs);
            self.not_done.push(if t.done { 0.0 } else { 1.0 });
            self.source.push(lambda);
            self.len += 1;
        } else {
            self.obs[i * OBS_DIM..(i + 1) * OBS_DIM].copy_from_slice(&t.obs);
            self.action[i * ACT_DIM..(i + 1) * ACT_DIM].copy_from_slice(&t.action);
            self.reward[i] = t.reward;
            self.next_obs[i * OBS_DIM..(i + 1) * OBS_DIM].copy_from_slice(&t.next_obs);
            self.not_done[i] = if t.done { 0.0 } else { 1.0 };
            self.source[i] = lambda;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    pub fn get(&self, i: usize) -> Transition {
        assert!(i < self.len);
        let mut t = Transition {
            obs: [0.0; OBS_DIM],
            action: [0.0; ACT_DIM],
            reward: self.reward[i],
            next_obs: [0.0; OBS_DIM],
            done: self.not_done[i] == 0.0,
        };
        t.obs.copy_from_slice(&self.obs[i * OBS_DIM..(i + 1) * OBS_DIM]);
        t.action.copy_from_slice(&self.action[i * ACT_DIM..(i + 1) * ACT_DIM]);
        t.next_obs.copy_from_slice(&self.next_obs[i * OBS_DIM..(i + 1) * OBS_DIM]);
        t
    }

    /// Appends `count` uniformly drawn transitions (with replacement).
    pub fn sample_into<R: Rng + ?Sized>(&self, count: usize, rng: &mut R, out: &mut Batch) {
        for _ in 0..count {
            let i = rng.random_range(0..self.len);
            out.obs.extend_from_slice(&self.obs[i * OBS_DIM..(i + 1) * OBS_DIM]);
            out.action.extend_from_slice(&self.action[i * ACT_DIM..(i + 1) * ACT_DIM]);
            out.reward.push(self.reward[i]);
            out.next_obs.extend_from_slice(&self.next_obs[i * OBS_DIM..(i + 1) * OBS_DIM]);
            out.not_done.push(self.not_done[i]);
        }
    }
}

/// Row-major minibatch assembled from one or more buffers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Batch {
    pub obs: Vec<f32>,
    pub action: Vec<f32>,
    pub reward: Vec<f32>,
    pub next_obs: Vec<f32>,
    pub not_done: Vec<f32>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.reward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reward.is_empty()
    }

    pub fn clear(&mut self) {
        self.obs.clear();
        self.action.clear();
        self.reward.clear();
        self.next_obs.clear();
        self.not_done.clear();
    }

    pub fn push(&mut self, t: &Transition) {
        self.obs.extend_from_slice(&t.obs);
        self.action.extend_from_slice(&t.action);
        self.reward.push(t.reward);
        self.next_obs.extend_from_slice(&t.next_obs);
        self.not_done.push(if t.done { 0.0 } else { 1.0 });
    }
}

/// N replay buffers with their weight splits and the round-robin cursor k.
///
/// In shared mode a single buffer of capacity N·C receives every episode,
/// while episodes still cycle through the N weight splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiBuffer {
    lambdas: Vec<f64>,
    buffers: Vec<ReplayBuffer>,
    cursor: usize,
}

impl MultiBuffer {
    pub fn new(lambdas: Vec<f64>, capacity: usize) -> Self {
        let buffers = lambdas.iter().map(|l| ReplayBuffer::new(capacity, *l)).collect();
        Self {
            lambdas,
            buffers,
            cursor: 0,
        }
    }

    pub fn shared(lambdas: Vec<f64>, capacity: usize) -> Self {
        let total = capacity * lambdas.len();
        let mean = lambdas.iter().sum::<f64>() / lambdas.len() as f64;
        Self {
            lambdas,
            buffers: vec![ReplayBuffer::new(total, mean)],
            cursor: 0,
        }
    }

    pub fn is_shared(&self) -> bool {
        self.buffers.len() == 1 && self.lambdas.len() > 1
    }

    /// Index k of the split used for the next episode.
    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn current_lambda(&self) -> f64 {
        self.lambdas[self.cursor]
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn buffers(&self) -> &[ReplayBuffer] {
        &self.buffers
    }

    pub fn total_len(&self) -> usize {
        self.buffers.iter().map(ReplayBuffer::len).sum()
    }

    /// Stores a transition generated under the current split.
    pub fn push(&mut self, t: &Transition) {
        let lambda = self.current_lambda();
        let b = if self.is_shared() { 0 } else { self.cursor };
        self.buffers[b].push(t, lambda);
    }

    /// k ← (k + 1) mod N; called once per episode.
    pub fn advance(&mut self) {
        self.cursor = (self.cursor + 1) % self.lambdas.len();
    }

    pub fn ready(&self, batch: usize) -> bool {
        self.buffers.iter().all(|b| b.len() >= batch)
    }

    /// One batch of `batch` transitions per split. A shared buffer supplies
    /// all N·batch from itself.
    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R, out: &mut Batch) -> Result<()> {
        let per = if self.is_shared() { batch * self.lambdas.len() } else { batch };
        if let Some((i, b)) = self.buffers.iter().enumerate().find(|(_, b)| b.len() < batch) {
            return Err(Error::InsufficientData {
                buffer: i,
                len: b.len(),
                batch,
            });
        }
        out.clear();
        for b in &self.buffers {
            b.sample_into(per, rng, out);
        }
        Ok(())
    }
}
