//! The `train` command.

use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};

use super::artifacts::{Artifact, RunDir};
use super::config::RunConfig;
use super::eval::{episodes_to_convergence, moving_average, rollout, Verdict};
use crate::control::PolicyController;
use crate::env::{fmt9, InvertEnv};
use crate::td3::{EpisodeLog, Trainer, TRAIN_LOG_HEADER};
use crate::{Error, Result};

pub const TRAIN_LOG: &str = "train_log.csv";
pub const TIMINGS: &str = "timings.csv";
pub const FINAL_CHECKPOINT: &str = "checkpoint.bin";
pub const POLICY: &str = "policy.bin";

/// Machine-readable result of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub seed: u64,
    pub episodes: usize,
    pub final_return: f64,
    /// Trailing moving average at the last episode.
    pub final_average: f64,
    pub converged_at: Option<usize>,
    pub nominal_success: bool,
    pub nominal_time_to_inversion: Option<f64>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub logs: Vec<EpisodeLog>,
    pub trainer: Trainer,
    pub summary: TrainSummary,
    pub dir: PathBuf,
}

/// Trains from scratch, or continues a checkpoint up to the configured
/// episode count, into `out`. Writes the config
/// echo, `train_log.csv`, `timings.csv`, periodic checkpoints under
/// `checkpoints/`, the final checkpoint, the actor-only `policy.bin` and
/// `summary.toml`.
pub fn train(cfg: &RunConfig, seed: u64, out: &Path, resume: Option<&Path>) -> Result<TrainOutcome> {
    cfg.validate()?;
    let params = cfg.blimp_params()?;
    let mut trainer = match resume {
        Some(p) => match Artifact::load(p)? {
            Artifact::Trainer(t) => {
                let mut t = *t;
                t.hyper.episodes = cfg.td3.episodes;
                t
            }
            Artifact::Policy(_) => {
                return Err(Error::Checkpoint(format!("{}: holds only a policy", p.display())))
            }
        },
        None => Trainer::new(cfg.td3.clone(), cfg.env.clone(), params.clone(), seed)?,
    };
    let dir = RunDir::create(out)?;
    let mut echo = cfg.clone();
    echo.seed = Some(seed);
    echo.td3 = trainer.hyper.clone();
    dir.write("config.toml", echo.to_toml_string())?;
    let ckpt = dir.subdir("checkpoints")?;

    let mut log = csv::Writer::from_writer(dir.create_file(TRAIN_LOG)?);
    log.write_record(TRAIN_LOG_HEADER)?;
    let mut timings = csv::Writer::from_writer(dir.create_file(TIMINGS)?);
    timings.write_record(["episode", "wall_time"])?;

    let start = Instant::now();
    let mut logs = Vec::with_capacity(trainer.hyper.episodes);
    while !trainer.is_done() {
        let row = trainer.run_episode()?;
        log.write_record(row.record())?;
        timings.write_record([row.episode.to_string(), fmt9(start.elapsed().as_secs_f64())])?;
        if row.episode % 10 == 0 {
            log.flush().map_err(|e| Error::io(dir.path(TRAIN_LOG), e))?;
            info!(
                "seed {seed} episode {} return {:.2} sigma {:.4} critic {:.4}",
                row.episode, row.ret, row.sigma, row.critic_loss
            );
        }
        if cfg.checkpoint_every > 0 && row.episode % cfg.checkpoint_every == 0 {
            Artifact::Trainer(Box::new(trainer.clone()))
                .save(ckpt.path(format!("episode_{:05}.bin", row.episode)))?;
        }
        logs.push(row);
    }
    log.flush().map_err(|e| Error::io(dir.path(TRAIN_LOG), e))?;
    timings.flush().map_err(|e| Error::io(dir.path(TIMINGS), e))?;
    let wall = start.elapsed().as_secs_f64();

    Artifact::Trainer(Box::new(trainer.clone())).save(dir.path(FINAL_CHECKPOINT))?;
    Artifact::Policy(trainer.agent.nets.actor.clone()).save(dir.path(POLICY))?;

    let verdict = nominal_verdict(cfg, &trainer)?;
    let returns: Vec<f64> = logs.iter().map(|r| r.ret).collect();
    let window = cfg.ablation.window;
    let summary = TrainSummary {
        seed,
        episodes: trainer.episode,
        final_return: returns.last().copied().unwrap_or(0.0),
        final_average: moving_average(&returns, window).last().copied().unwrap_or(0.0),
        converged_at: episodes_to_convergence(&returns, window, cfg.ablation.threshold),
        nominal_success: verdict.success,
        nominal_time_to_inversion: verdict.time_to_inversion,
        wall_time_s: wall,
    };
    dir.write_toml("summary.toml", &summary)?;
    Ok(TrainOutcome {
        logs,
        trainer,
        summary,
        dir: dir.root().to_path_buf(),
    })
}

/// Deterministic policy rollout on the training model.
fn nominal_verdict(cfg: &RunConfig, trainer: &Trainer) -> Result<Verdict> {
    let mut env = InvertEnv::new(trainer.params.clone(), cfg.eval_env())?;
    let mut c = PolicyController::new(trainer.agent.nets.actor.clone());
    let records = rollout(&mut env, &mut c, trainer.params.clone(), 0.0, cfg.success.horizon)?;
    Ok(cfg.success.judge_records(&records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::td3::Td3Hyper;

    fn tiny() -> RunConfig {
        RunConfig {
            checkpoint_every: 1,
            td3: Td3Hyper { episodes: 2, hidden: 8, buffers: 2, batch_size: 4, ..Td3Hyper::default() },
            env: crate::env::EnvConfig { episode_time: 1.0, ..Default::default() },
            ..RunConfig::default()
        }
    }

    #[test]
    fn writes_layout_and_is_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny();
        let a = train(&cfg, 5, &dir.path().join("a"), None).unwrap();
        let b = train(&cfg, 5, &dir.path().join("b"), None).unwrap();
        for f in ["config.toml", TRAIN_LOG, TIMINGS, FINAL_CHECKPOINT, POLICY, "summary.toml", "checkpoints/episode_00002.bin"] {
            assert!(a.dir.join(f).is_file(), "missing {f}");
        }
        let la = std::fs::read(a.dir.join(TRAIN_LOG)).unwrap();
        let lb = std::fs::read(b.dir.join(TRAIN_LOG)).unwrap();
        assert_eq!(la, lb);
        assert_eq!(EpisodeLog::read_csv(la.as_slice()).unwrap().len(), 2);
        let echo = RunConfig::load(a.dir.join("config.toml")).unwrap();
        assert_eq!(echo.seed, Some(5));
    }

    #[test]
    fn resume_continues_episode_count() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny();
        let a = train(&cfg, 1, &dir.path().join("a"), None).unwrap();
        cfg.td3.episodes = 3;
        let ck = a.dir.join(FINAL_CHECKPOINT);
        let r = train(&cfg, 1, &dir.path().join("r"), Some(&ck)).unwrap();
        assert_eq!(r.logs.len(), 1);
        assert_eq!(r.logs[0].episode, 3);
        assert!(train(&cfg, 1, &dir.path().join("p"), Some(&a.dir.join(POLICY))).is_err());
    }
}
