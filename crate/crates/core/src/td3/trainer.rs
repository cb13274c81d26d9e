//! Domain-randomized collection interleaved with multi-buffer updates.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Agent, Batch, MultiBuffer, Td3Hyper, Transition};
use crate::dynamics::BlimpParams;
use crate::env::{fmt9, EnvConfig, InvertEnv, Observation, ACT_DIM, OBS_DIM};
use crate::Result;

pub const TRAIN_LOG_HEADER: [&str; 9] = [
    "episode",
    "return",
    "sigma",
    "lambda",
    "yaw",
    "steps",
    "updates",
    "critic_loss",
    "actor_q",
];

pub(crate) fn obs_f32(obs: &Observation) -> [f32; OBS_DIM] {
    obs.map(|v| v as f32)
}

/// One row of the training log.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    /// 1-based episode index.
    pub episode: usize,
    pub ret: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub yaw: f64,
    pub steps: usize,
    /// Gradient steps taken after this episode.
    pub updates: usize,
    pub critic_loss: f64,
    pub actor_q: f64,
}

impl EpisodeLog {
    pub fn record(&self) -> Vec<String> {
        vec![
            self.episode.to_string(),
            fmt9(self.ret),
            fmt9(self.sigma),
            fmt9(self.lambda),
            fmt9(self.yaw),
            self.steps.to_string(),
            self.updates.to_string(),
            fmt9(self.critic_loss),
            fmt9(self.actor_q),
        ]
    }

    pub fn write_csv<W: Write>(rows: &[EpisodeLog], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TRAIN_LOG_HEADER)?;
        for r in rows {
            w.write_record(r.record())?;
        }
        w.flush().map_err(|e| crate::Error::io("training log", e))?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<EpisodeLog>> {
        let mut rd = csv::Reader::from_reader(input);
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let f = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| crate::Error::invalid(format!("bad training log field {i}")))
            };
            rows.push(EpisodeLog {
                episode: f(0)? as usize,
                ret: f(1)?,
                sigma: f(2)?,
                lambda: f(3)?,
                yaw: f(4)?,
                steps: f(5)? as usize,
                updates: f(6)? as usize,
                critic_loss: f(7)?,
                actor_q: f(8)?,
            });
        }
        Ok(rows)
    }
}

/// Result of one exploratory episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Collected {
    pub ret: f64,
    pub steps: usize,
    pub lambda: f64,
    pub yaw: f64,
    pub terminated: bool,
}

/// Runs one episode of Alg. 1 under `lambda` with noise `sigma`, storing
/// every transition into the buffer selected by the multi-buffer cursor.
#[allow(clippy::too_many_arguments)]
pub fn collect_episode<R: Rng + ?Sized>(
    env: &mut InvertEnv,
    agent: &Agent,
    buffers: &mut MultiBuffer,
    sigma: f64,
    yaw_range: f64,
    rng: &mut R,
) -> Result<Collected> {
    let lambda = buffers.current_lambda();
    let yaw = if yaw_range > 0.0 {
        rng.random_range(-yaw_range..=yaw_range)
    } else {
        0.0
    };
    let mut obs = env.reset(lambda, yaw)?;
    let noise = (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("valid deviation"));
    let mut ret = 0.0;
    let mut steps = 0;
    let terminated;
    loop {
        let s = obs_f32(&obs);
        let mut a = agent.act(&s);
        if let Some(n) = &noise {
            for v in &mut a {
                *v = (*v + n.sample(rng) as f32).clamp(-1.0, 1.0);
            }
        }
        let action: [f64; ACT_DIM] = a.map(f64::from);
        let r = env.step(&action);
        buffers.push(&Transition {
            obs: s,
            action: a,
            reward: r.reward as f32,
            next_obs: obs_f32(&r.obs),
            done: r.terminated,
        });
        ret += r.reward;
        steps += 1;
        obs = r.obs;
        if r.done() {
            terminated = r.terminated;
            break;
        }
    }
    buffers.advance();
    Ok(Collected {
        ret,
        steps,
        lambda,
        yaw,
        terminated,
    })
}

/// Complete training state for the sequential mode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trainer {
    pub hyper: Td3Hyper,
    pub env_config: EnvConfig,
    pub params: BlimpParams,
    pub agent: Agent,
    /// Episodes completed.
    pub episode: usize,
    explore_rng: ChaCha8Rng,
    sample_rng: ChaCha8Rng,
    #[serde(skip)]
    env: Option<InvertEnv>,
    #[serde(skip)]
    buffers: Option<MultiBuffer>,
    #[serde(skip)]
    batch: Batch,
    /// Fractional gradient-step credit carried between episodes.
    credit: f64,
}

impl Trainer {
    pub fn new(hyper: Td3Hyper, env_config: EnvConfig, params: BlimpParams, seed: u64) -> Result<Self> {
        hyper.validate()?;
        env_config.validate()?;
        params.validate()?;
        let mut init_rng = ChaCha8Rng::seed_from_u64(seed);
        let mut explore_rng = ChaCha8Rng::seed_from_u64(seed);
        explore_rng.set_stream(1);
        let mut sample_rng = ChaCha8Rng::seed_from_u64(seed);
        sample_rng.set_stream(2);
        let agent = Agent::new(&hyper, &mut init_rng);
        let mut t = Self {
            hyper,
            env_config,
            params,
            agent,
            episode: 0,
            explore_rng,
            sample_rng,
            env: None,
            buffers: None,
            batch: Batch::default(),
            credit: 0.0,
        };
        t.ensure_runtime()?;
        Ok(t)
    }

    fn ensure_runtime(&mut self) -> Result<()> {
        if self.env.is_none() {
            self.env = Some(InvertEnv::new(self.params.clone(), self.env_config.clone())?);
        }
        if self.buffers.is_none() {
            let lambdas = self.hyper.lambdas();
            let mut b = if self.hyper.single_buffer {
                MultiBuffer::shared(lambdas, self.hyper.capacity)
            } else {
                MultiBuffer::new(lambdas, self.hyper.capacity)
            };
            for _ in 0..self.episode % self.hyper.buffers {
                b.advance();
            }
            self.buffers = Some(b);
        }
        Ok(())
    }

    pub fn buffers(&self) -> &MultiBuffer {
        self.buffers.as_ref().expect("runtime initialized")
    }

    pub fn is_done(&self) -> bool {
        self.episode >= self.hyper.episodes
    }

    /// Collects one episode and then runs the gradient steps it earned.
    pub fn run_episode(&mut self) -> Result<EpisodeLog> {
        self.ensure_runtime()?;
        let sigma = self.hyper.sigma_at(self.episode);
        let env = self.env.as_mut().expect("runtime");
        let buffers = self.buffers.as_mut().expect("runtime");
        let c = collect_episode(
            env,
            &self.agent,
            buffers,
            sigma,
            self.hyper.yaw_range,
            &mut self.explore_rng,
        )?;
        self.episode += 1;

        let mut updates = 0;
        let (mut closs, mut aq, mut n_aq) = (0.0f64, 0.0f64, 0usize);
        if buffers.ready(self.hyper.batch_size) {
            self.credit += c.steps as f64 * self.hyper.updates_per_step;
            while self.credit >= 1.0 {
                self.credit -= 1.0;
                buffers.sample(self.hyper.batch_size, &mut self.sample_rng, &mut self.batch)?;
                let l = self
                    .agent
                    .train_step(&self.batch, &self.hyper, &mut self.sample_rng);
                closs += 0.5 * f64::from(l.critic1 + l.critic2);
                if let Some(q) = l.actor_q {
                    aq += f64::from(q);
                    n_aq += 1;
                }
                updates += 1;
            }
        }
        Ok(EpisodeLog {
            episode: self.episode,
            ret: c.ret,
            sigma,
            lambda: c.lambda,
            yaw: c.yaw,
            steps: c.steps,
            updates,
            critic_loss: if updates > 0 { closs / updates as f64 } else { 0.0 },
            actor_q: if n_aq > 0 { aq / n_aq as f64 } else { 0.0 },
        })
    }
}
