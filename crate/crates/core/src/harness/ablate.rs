//! Training-stability ablation: multi-buffer and clipping on/off.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::artifacts::RunDir;
use super::config::RunConfig;
use super::eval::{episodes_to_convergence, moving_average};
use super::pool::parallel_map;
use super::train::train;
use crate::env::fmt9;
use crate::td3::Td3Hyper;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Multi-buffer with gradient clipping.
    Full,
    /// Multi-buffer without clipping.
    NoClip,
    /// One shared buffer of capacity N·C, with clipping.
    SingleBuffer,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Full, Variant::NoClip, Variant::SingleBuffer];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::NoClip => "no_clip",
            Variant::SingleBuffer => "single_buffer",
        }
    }

    pub fn apply(self, base: &Td3Hyper) -> Td3Hyper {
        let mut h = base.clone();
        match self {
            Variant::Full => {}
            Variant::NoClip => h.clip_gradients = false,
            Variant::SingleBuffer => h.single_buffer = true,
        }
        h
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblationSpec {
    pub variants: Vec<Variant>,
    pub seeds: Vec<u64>,
    /// Overrides the training episode count N_e.
    pub episodes: Option<usize>,
    /// Moving-average window.
    pub window: usize,
    /// Return the moving average must reach to count as converged.
    pub threshold: f64,
}

impl Default for AblationSpec {
    fn default() -> Self {
        Self {
            variants: Variant::ALL.to_vec(),
            seeds: vec![0, 1, 2],
            episodes: None,
            window: 19,
            threshold: 120.0,
        }
    }
}

impl AblationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.variants.is_empty() || self.seeds.is_empty() {
            return Err(Error::invalid("ablation needs at least one variant and one seed"));
        }
        if self.window == 0 || self.episodes == Some(0) {
            return Err(Error::invalid("ablation window and episodes must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRun {
    pub variant: Variant,
    pub seed: u64,
    pub converged_at: Option<usize>,
    #[serde(skip)]
    pub returns: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub variant: Variant,
    /// Median over seeds; runs that never converge count as N_e + 1.
    pub median_convergence: f64,
    pub converged_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationSummary {
    pub episodes: usize,
    pub window: usize,
    pub threshold: f64,
    pub runs: Vec<AblationRun>,
    pub variants: Vec<VariantSummary>,
}

impl AblationSummary {
    pub fn from_runs(mut runs: Vec<AblationRun>, episodes: usize, spec: &AblationSpec) -> Self {
        runs.sort_by_key(|r| (r.variant, r.seed));
        let mut variants = Vec::new();
        for v in Variant::ALL {
            let mut c: Vec<f64> = runs
                .iter()
                .filter(|r| r.variant == v)
                .map(|r| r.converged_at.unwrap_or(episodes + 1) as f64)
                .collect();
            if c.is_empty() {
                continue;
            }
            c.sort_by(f64::total_cmp);
            let n = c.len();
            let median = if n % 2 == 1 { c[n / 2] } else { 0.5 * (c[n / 2 - 1] + c[n / 2]) };
            variants.push(VariantSummary {
                variant: v,
                median_convergence: median,
                converged_runs: runs.iter().filter(|r| r.variant == v && r.converged_at.is_some()).count(),
            });
        }
        Self {
            episodes,
            window: spec.window,
            threshold: spec.threshold,
            runs,
            variants,
        }
    }

    pub fn median(&self, v: Variant) -> Option<f64> {
        self.variants.iter().find(|s| s.variant == v).map(|s| s.median_convergence)
    }

    /// Long-format CSV: variant, seed, episode, return, moving average.
    pub fn write_returns<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["variant", "seed", "episode", "return", "moving_average"])?;
        for r in &self.runs {
            let ma = moving_average(&r.returns, self.window);
            for (i, (ret, m)) in r.returns.iter().zip(&ma).enumerate() {
                w.write_record([
                    r.variant.name().to_string(),
                    r.seed.to_string(),
                    (i + 1).to_string(),
                    fmt9(*ret),
                    fmt9(*m),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("ablation returns", e))
    }
}

/// Trains every (variant, seed) pair into `out/<variant>/s<seed>` and
/// summarizes episodes-to-convergence.
pub fn run_ablation(cfg: &RunConfig, out: &Path, workers: usize) -> Result<AblationSummary> {
    let spec = &cfg.ablation;
    spec.validate()?;
    let episodes = spec.episodes.unwrap_or(cfg.td3.episodes);
    let dir = RunDir::create(out)?;
    let mut jobs = Vec::new();
    for &v in &spec.variants {
        for &s in &spec.seeds {
            jobs.push((v, s));
        }
    }
    let runs = parallel_map(workers, jobs, |(variant, seed)| {
        let mut c = cfg.clone();
        c.td3 = variant.apply(&cfg.td3);
        c.td3.episodes = episodes;
        let o = train(&c, seed, &dir.path(format!("{}/s{seed}", variant.name())), None)?;
        let returns: Vec<f64> = o.logs.iter().map(|r| r.ret).collect();
        Ok(AblationRun {
            variant,
            seed,
            converged_at: episodes_to_convergence(&returns, spec.window, spec.threshold),
            returns,
        })
    })?;
    let summary = AblationSummary::from_runs(runs, episodes, spec);
    summary.write_returns(dir.create_file("ablation_returns.csv")?)?;
    dir.write_toml("ablation_summary.toml", &summary)?;
    Ok(summary)
}
