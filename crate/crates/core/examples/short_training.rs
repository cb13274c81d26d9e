//! A few TD3 episodes with checkpointing, then a resume from the final
//! checkpoint.
use blimp_invert::harness::{train, RunConfig, FINAL_CHECKPOINT};

fn main() -> anyhow::Result<()> {
    let out = std::env::temp_dir().join("blimp_short_training");
    let mut cfg = RunConfig { checkpoint_every: 2, ..RunConfig::default() };
    cfg.td3.episodes = 4;
    let first = train(&cfg, 0, &out, None)?;
    for l in &first.logs {
        println!("episode {} return {:.2} sigma {:.4}", l.episode, l.ret, l.sigma);
    }
    cfg.td3.episodes = 5;
    let resumed = train(&cfg, 0, &out.join("resumed"), Some(&out.join(FINAL_CHECKPOINT)))?;
    println!("resumed to episode {}; outputs in {}", resumed.summary.episodes, out.display());
    Ok(())
}
