//! Deploys a trained policy on the mismatched stand-in plant across mapping
//! scales. Takes the policy path as an argument, defaulting to the committed
//! seed-0 policy.
use blimp_invert::control::{deploy_rollout, DeployScenario, MappingLayer};
use blimp_invert::harness::{load_actor, RunConfig};

fn main() -> anyhow::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/../../artifacts/ablation/full/s0/policy.bin").into()
    });
    let actor = load_actor(&path)?;
    let cfg = RunConfig::default();
    let sim = cfg.blimp_params()?;
    for m in [0.5, 0.6, 0.7, 0.8] {
        let sc = DeployScenario {
            mapping: MappingLayer { scale: [m, 0.1, 0.1], ..MappingLayer::default() },
            ..DeployScenario::default()
        };
        let o = deploy_rollout(&actor, &sc, &sim, &cfg.eval_env(), &cfg.success)?;
        println!(
            "m_phi {m}: success {} time to inversion {:?} handover {:?}",
            o.verdict.success, o.verdict.time_to_inversion, o.handover
        );
    }
    Ok(())
}
