use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Td3Hyper {
    /// Number of replay buffers N, one per weight split λ_k.
    pub buffers: usize,
    /// Store every episode in one shared buffer of capacity N·C instead.
    pub single_buffer: bool,
    /// Training episodes N_e.
    pub episodes: usize,
    /// Initial exploration standard deviation σ.
    pub sigma: f64,
    /// Decay factor ξ applied to σ every `sigma_every` episodes.
    pub sigma_decay: f64,
    /// n_σ.
    pub sigma_every: usize,
    /// Actor update delay d_p.
    pub policy_delay: usize,
    pub gamma: f64,
    /// Soft target update rate ϖ.
    pub tau: f64,
    /// Elementwise gradient clipping; disabled for the ablation.
    pub clip_gradients: bool,
    pub clip_actor: f64,
    pub clip_critic: f64,
    /// Range the λ_k are evenly spaced over.
    pub lambda_range: [f64; 2],
    /// ψ0: initial yaw is drawn from U(-ψ0, ψ0).
    pub yaw_range: f64,
    /// Transitions drawn from each buffer per gradient step.
    pub batch_size: usize,
    pub lr_actor: f64,
    pub lr_critic: f64,
    /// Capacity C of each buffer.
    pub capacity: usize,
    pub hidden: usize,
    /// Gradient steps per collected transition.
    pub updates_per_step: f64,
    /// Target-policy smoothing noise; 0 disables it.
    pub target_noise: f64,
    pub target_noise_clip: f64,
    /// Scale of the final actor layer's initial weights.
    pub actor_final_init: f64,
}

impl Default for Td3Hyper {
    fn default() -> Self {
        Self {
            buffers: 10,
            single_buffer: false,
            episodes: 500,
            sigma: 0.15,
            sigma_decay: 0.95,
            sigma_every: 100,
            policy_delay: 2,
            gamma: 0.98,
            tau: 0.01,
            clip_gradients: true,
            clip_actor: 0.1,
            clip_critic: 0.1,
            lambda_range: [0.6, 1.0],
            yaw_range: 0.5,
            batch_size: 16,
            lr_actor: 1e-4,
            lr_critic: 1e-3,
            capacity: 20_000,
            hidden: 256,
            updates_per_step: 1.0,
            target_noise: 0.0,
            target_noise_clip: 0.5,
            actor_final_init: 1e-3,
        }
    }
}

impl Td3Hyper {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::invalid(m.to_string()));
        if self.buffers == 0 || self.episodes == 0 || self.batch_size == 0 || self.capacity == 0 {
            return fail("buffers, episodes, batch_size and capacity must be positive");
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return fail("gamma must lie in (0, 1)");
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return fail("tau must lie in (0, 1]");
        }
        if self.policy_delay == 0 || self.sigma_every == 0 {
            return fail("policy_delay and sigma_every must be at least 1");
        }
        if !(self.sigma >= 0.0 && self.sigma_decay > 0.0) {
            return fail("sigma must be nonnegative and sigma_decay positive");
        }
        if !(self.clip_actor > 0.0 && self.clip_critic > 0.0) {
            return fail("clipping bounds must be positive");
        }
        let [lo, hi] = self.lambda_range;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return fail("lambda_range must satisfy 0 <= lo <= hi <= 1");
        }
        if !(self.yaw_range >= 0.0 && self.lr_actor > 0.0 && self.lr_critic > 0.0) {
            return fail("yaw_range must be nonnegative and learning rates positive");
        }
        if !(self.updates_per_step >= 0.0 && self.target_noise >= 0.0) {
            return fail("updates_per_step and target_noise must be nonnegative");
        }
        if self.hidden == 0 {
            return fail("hidden must be positive");
        }
        Ok(())
    }

    /// λ_1..λ_N evenly spaced over `lambda_range`, inclusive.
    pub fn lambdas(&self) -> Vec<f64> {
        let [lo, hi] = self.lambda_range;
        if self.buffers == 1 {
            return vec![hi];
        }
        let n = self.buffers - 1;
        (0..self.buffers)
            .map(|k| lo + (hi - lo) * k as f64 / n as f64)
            .collect()
    }

    /// σ in force during 0-based episode `episode`: decayed once at every
    /// multiple of `sigma_every` after the start.
    pub fn sigma_at(&self, episode: usize) -> f64 {
        self.sigma * self.sigma_decay.powi((episode / self.sigma_every) as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lambdas_span_range() {
        let h = Td3Hyper::default();
        let l = h.lambdas();
        assert_eq!(l.len(), 10);
        assert_abs_diff_eq!(l[0], 0.6);
        assert_abs_diff_eq!(l[9], 1.0);
        assert_abs_diff_eq!(l[1] - l[0], 0.4 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn sigma_schedule() {
        let h = Td3Hyper::default();
        assert_eq!(h.sigma_at(0), 0.15);
        assert_eq!(h.sigma_at(99), 0.15);
        assert_abs_diff_eq!(h.sigma_at(100), 0.1425, epsilon = 1e-15);
        assert_abs_diff_eq!(h.sigma_at(300), 0.128_606_25, epsilon = 1e-12);
    }

    #[test]
    fn validation() {
        assert!(Td3Hyper::default().validate().is_ok());
        for bad in [
            Td3Hyper { gamma: 1.0, ..Default::default() },
            Td3Hyper { tau: 0.0, ..Default::default() },
            Td3Hyper { policy_delay: 0, ..Default::default() },
            Td3Hyper { lambda_range: [0.9, 0.6], ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
