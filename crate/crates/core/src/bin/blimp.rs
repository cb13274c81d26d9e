use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use blimp_invert::control::deploy_rollout;
use blimp_invert::harness::{
    load_actor, run_ablation, run_grid, run_rollout, train, write_records, RunConfig, RunDir,
};

#[derive(Parser)]
#[command(name = "blimp", version, about = "Blimp inversion: training, evaluation and deployment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Checkpoint to evaluate, deploy or resume from.
    #[arg(long, global = true)]
    checkpoint: Option<PathBuf>,
    /// Parallel workers for grids and ablations.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy.
    Train,
    /// Evaluate the policy and baseline over a parameter grid.
    EvalGrid,
    /// Train the three ablation variants over matched seeds.
    Ablate,
    /// Run a policy against a mismatched plant through the mapping layer.
    Deploy,
    /// Record one episode of a single controller.
    Rollout,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let c = &cli.common;
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => RunConfig::default(),
    };
    if c.seed.is_some() {
        cfg.seed = c.seed;
    }
    if c.out.is_some() {
        cfg.out = c.out.clone();
    }
    cfg.validate()?;
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("runs"));
    let workers = c.workers.max(1);

    match cli.command {
        Command::Train => {
            let seed = cfg.require_seed()?;
            let o = train(&cfg, seed, &out, c.checkpoint.as_deref())?;
            println!(
                "trained {} episodes; nominal success {}; outputs in {}",
                o.summary.episodes,
                o.summary.nominal_success,
                o.dir.display()
            );
        }
        Command::EvalGrid => {
            let actor = load_actor(required(&c.checkpoint)?)?;
            let report = run_grid(&cfg, Some(&actor), workers)?;
            let dir = RunDir::create(&out)?;
            dir.write("config.toml", cfg.to_toml_string())?;
            report.write_rows(dir.create_file("grid_rows.csv")?)?;
            report.write_matrix(dir.create_file("grid_matrix.csv")?)?;
            for v in &report.matrix {
                println!(
                    "{:8} m_w={:.5} lambda={:.2} g_m={:.2}: {} ({}/{})",
                    v.controller.name(),
                    v.cell.extra_weight,
                    v.cell.weight_split,
                    v.cell.motor_gain,
                    if v.success { "success" } else { "failure" },
                    v.successes,
                    v.trials
                );
            }
        }
        Command::Ablate => {
            let s = run_ablation(&cfg, &out, workers)?;
            RunDir::create(&out)?.write("config.toml", cfg.to_toml_string())?;
            for v in &s.variants {
                println!(
                    "{:14} median convergence {:.1} ({} of {} runs converged)",
                    v.variant.name(),
                    v.median_convergence,
                    v.converged_runs,
                    s.runs.iter().filter(|r| r.variant == v.variant).count()
                );
            }
        }
        Command::Deploy => {
            let actor = load_actor(required(&c.checkpoint)?)?;
            let params = cfg.blimp_params()?;
            let o = deploy_rollout(&actor, &cfg.deploy, &params, &cfg.eval_env(), &cfg.success)?;
            let dir = RunDir::create(&out)?;
            dir.write("config.toml", cfg.to_toml_string())?;
            write_records(&o.records, params.actuation.thrusters.len(), dir.create_file("deploy.csv")?)?;
            dir.write_toml(
                "summary.toml",
                &DeploySummary {
                    success: o.verdict.success,
                    time_to_inversion: o.verdict.time_to_inversion,
                    final_roll_deviation: o.verdict.final_roll_deviation,
                    handover: o.handover,
                },
            )?;
            println!("deploy: success {} handover {:?}", o.verdict.success, o.handover);
        }
        Command::Rollout => {
            let actor = c.checkpoint.as_deref().map(load_actor).transpose()?;
            let params = cfg.blimp_params()?;
            let (records, v) = run_rollout(&cfg, actor.as_ref())?;
            let dir = RunDir::create(&out)?;
            dir.write("config.toml", cfg.to_toml_string())?;
            write_records(&records, params.actuation.thrusters.len(), dir.create_file("rollout.csv")?)?;
            println!("rollout: success {} time to inversion {:?}", v.success, v.time_to_inversion);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct DeploySummary {
    success: bool,
    time_to_inversion: Option<f64>,
    final_roll_deviation: f64,
    handover: Option<f64>,
}

fn required(p: &Option<PathBuf>) -> Result<&Path> {
    p.as_deref().context("--checkpoint is required for this command")
}
