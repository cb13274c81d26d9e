//! Parameter-variation evaluation grids.

use std::cmp::Ordering;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::eval::{rollout, Verdict};
use super::pool::parallel_map;
use crate::control::{Controller, EnergyShaping, PolicyController};
use crate::dynamics::{derive_geometry, BlimpParams};
use crate::env::{fmt9, InvertEnv};
use crate::td3::Mlp;
use crate::{Error, Result};

/// One plant configuration: extra weight m_w (kg), split λ and motor gain g_m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCell {
    pub extra_weight: f64,
    pub weight_split: f64,
    pub motor_gain: f64,
}

impl GridCell {
    pub const NOMINAL: GridCell = GridCell::new(0.02335, 1.0, 1.7);

    pub const fn new(extra_weight: f64, weight_split: f64, motor_gain: f64) -> Self {
        Self {
            extra_weight,
            weight_split,
            motor_gain,
        }
    }

    pub fn apply(&self, base: &BlimpParams) -> Result<BlimpParams> {
        let p = base
            .clone()
            .with_extra_weight(self.extra_weight)
            .with_weight_split(self.weight_split)
            .with_motor_gain(self.motor_gain);
        p.validate()?;
        derive_geometry(&p)?;
        Ok(p)
    }

    fn cmp_key(&self, other: &Self) -> Ordering {
        self.extra_weight
            .total_cmp(&other.extra_weight)
            .then(self.weight_split.total_cmp(&other.weight_split))
            .then(self.motor_gain.total_cmp(&other.motor_gain))
    }
}

impl Default for GridCell {
    fn default() -> Self {
        Self::NOMINAL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridPreset {
    /// m_w ∈ {5, 10, 15, 20, 25} g.
    ExtraWeight,
    /// λ ∈ {0.6, …, 1.0}.
    WeightSplit,
    /// g_m ∈ {0.5, …, 2.5}.
    MotorGain,
    /// Five combined variations.
    Combined,
    /// All of the above.
    All,
}

impl GridPreset {
    pub fn cells(self) -> Vec<GridCell> {
        let n = GridCell::NOMINAL;
        match self {
            GridPreset::ExtraWeight => [5.0, 10.0, 15.0, 20.0, 25.0]
                .map(|g| GridCell::new(g * 1e-3, 1.0, n.motor_gain))
                .to_vec(),
            GridPreset::WeightSplit => [0.6, 0.7, 0.8, 0.9, 1.0]
                .map(|l| GridCell::new(n.extra_weight, l, n.motor_gain))
                .to_vec(),
            GridPreset::MotorGain => [0.5, 1.0, 1.5, 2.0, 2.5]
                .map(|g| GridCell::new(n.extra_weight, 1.0, g))
                .to_vec(),
            GridPreset::Combined => vec![
                GridCell::new(0.015, 0.8, 1.7),
                GridCell::new(0.015, 1.0, 1.0),
                GridCell::new(0.020, 0.9, 1.6),
                GridCell::new(0.025, 0.7, 1.5),
                GridCell::new(0.025, 0.8, 1.4),
            ],
            GridPreset::All => [
                GridPreset::ExtraWeight,
                GridPreset::WeightSplit,
                GridPreset::MotorGain,
                GridPreset::Combined,
            ]
            .iter()
            .flat_map(|p| p.cells())
            .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub preset: Option<GridPreset>,
    /// Extra cells evaluated after the preset's.
    pub cells: Vec<GridCell>,
    pub seeds: usize,
    pub episodes: usize,
    /// Also evaluate the energy-shaping baseline.
    pub baseline: bool,
    /// Initial yaw is drawn per seed from U(-yaw_range, yaw_range).
    pub yaw_range: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            preset: Some(GridPreset::All),
            cells: Vec::new(),
            seeds: 3,
            episodes: 1,
            baseline: true,
            yaw_range: 0.5,
        }
    }
}

impl GridSpec {
    pub fn resolved_cells(&self) -> Vec<GridCell> {
        let mut v = self.preset.map(GridPreset::cells).unwrap_or_default();
        v.extend(self.cells.iter().copied());
        v
    }

    pub fn validate(&self) -> Result<()> {
        let cells = self.resolved_cells();
        if cells.is_empty() {
            return Err(Error::invalid("evaluation grid is empty"));
        }
        if self.seeds == 0 || self.episodes == 0 {
            return Err(Error::invalid("grid seeds and episodes must be positive"));
        }
        if !(self.yaw_range >= 0.0) {
            return Err(Error::invalid("grid yaw_range must be nonnegative"));
        }
        for c in &cells {
            if !(c.extra_weight >= 0.0 && (0.0..=1.0).contains(&c.weight_split) && c.motor_gain > 0.0) {
                return Err(Error::invalid(format!("grid cell out of range: {c:?}")));
            }
        }
        Ok(())
    }

    /// Initial yaws for `seed`, one per episode.
    pub fn yaws(&self, seed: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
        (0..self.episodes)
            .map(|_| {
                if self.yaw_range > 0.0 {
                    rng.random_range(-self.yaw_range..=self.yaw_range)
                } else {
                    0.0
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    Policy,
    Baseline,
}

impl ControllerKind {
    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::Policy => "policy",
            ControllerKind::Baseline => "baseline",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub controller: ControllerKind,
    pub cell: GridCell,
    pub seed: usize,
    /// Episodes that met the criterion.
    pub successes: usize,
    pub episodes: usize,
    pub success: bool,
    /// Mean over successful episodes.
    pub time_to_inversion: Option<f64>,
    /// Mean over all episodes.
    pub final_roll_deviation: f64,
}

/// Majority vote over seeds for one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridVerdict {
    pub controller: ControllerKind,
    pub cell: GridCell,
    pub successes: usize,
    pub trials: usize,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridReport {
    pub rows: Vec<GridRow>,
    pub matrix: Vec<GridVerdict>,
}

fn majority(successes: usize, n: usize) -> bool {
    2 * successes > n
}

impl GridReport {
    pub fn verdict(&self, controller: ControllerKind, cell: &GridCell) -> Option<&GridVerdict> {
        self.matrix
            .iter()
            .find(|v| v.controller == controller && v.cell == *cell)
    }

    pub fn write_rows<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "controller", "extra_weight", "weight_split", "motor_gain", "seed", "successes",
            "episodes", "success", "time_to_inversion", "final_roll_deviation",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.controller.name().to_string(),
                fmt9(r.cell.extra_weight),
                fmt9(r.cell.weight_split),
                fmt9(r.cell.motor_gain),
                r.seed.to_string(),
                r.successes.to_string(),
                r.episodes.to_string(),
                u8::from(r.success).to_string(),
                r.time_to_inversion.map(fmt9).unwrap_or_default(),
                fmt9(r.final_roll_deviation),
            ])?;
        }
        w.flush().map_err(|e| Error::io("grid rows", e))
    }

    pub fn write_matrix<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "controller", "extra_weight", "weight_split", "motor_gain", "successes", "trials", "success",
        ])?;
        for v in &self.matrix {
            w.write_record([
                v.controller.name().to_string(),
                fmt9(v.cell.extra_weight),
                fmt9(v.cell.weight_split),
                fmt9(v.cell.motor_gain),
                v.successes.to_string(),
                v.trials.to_string(),
                u8::from(v.success).to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("grid matrix", e))
    }
}

/// Runs one controller on one cell for the given yaws.
pub fn evaluate_cell(
    cfg: &RunConfig,
    base: &BlimpParams,
    actor: Option<&Mlp<f32>>,
    kind: ControllerKind,
    cell: &GridCell,
    yaws: &[f64],
) -> Result<Vec<Verdict>> {
    let plant = cell.apply(base)?;
    let mut env = InvertEnv::new(base.clone(), cfg.eval_env())?;
    let mut controller: Box<dyn Controller> = match kind {
        ControllerKind::Policy => {
            let a = actor.ok_or_else(|| Error::invalid("policy evaluation needs a checkpoint"))?;
            Box::new(PolicyController::new(a.clone()))
        }
        ControllerKind::Baseline => {
            Box::new(EnergyShaping::new(base, cfg.baseline.clone(), env.torque_scale())?)
        }
    };
    yaws.iter()
        .map(|&yaw| {
            let rec = rollout(&mut env, controller.as_mut(), plant.clone(), yaw, cfg.success.horizon)?;
            Ok(cfg.success.judge_records(&rec))
        })
        .collect()
}

/// Evaluates the configured grid. `actor = None` skips the policy rows.
/// Rows come back sorted by controller, cell and seed regardless of
/// scheduling.
pub fn run_grid(cfg: &RunConfig, actor: Option<&Mlp<f32>>, workers: usize) -> Result<GridReport> {
    cfg.grid.validate()?;
    let base = cfg.blimp_params()?;
    let cells = cfg.grid.resolved_cells();
    let mut kinds = Vec::new();
    if actor.is_some() {
        kinds.push(ControllerKind::Policy);
    }
    if cfg.grid.baseline {
        kinds.push(ControllerKind::Baseline);
    }
    let mut jobs = Vec::new();
    for &k in &kinds {
        for c in &cells {
            for s in 0..cfg.grid.seeds {
                jobs.push((k, *c, s));
            }
        }
    }
    let results = parallel_map(workers, jobs, |(kind, cell, seed)| {
        let yaws = cfg.grid.yaws(seed);
        let v = evaluate_cell(cfg, &base, actor, kind, &cell, &yaws)?;
        let successes = v.iter().filter(|x| x.success).count();
        let t: Vec<f64> = v.iter().filter(|x| x.success).filter_map(|x| x.time_to_inversion).collect();
        Ok(GridRow {
            controller: kind,
            cell,
            seed,
            successes,
            episodes: v.len(),
            success: majority(successes, v.len()),
            time_to_inversion: (!t.is_empty()).then(|| t.iter().sum::<f64>() / t.len() as f64),
            final_roll_deviation: v.iter().map(|x| x.final_roll_deviation).sum::<f64>() / v.len() as f64,
        })
    })?;
    let mut rows = results;
    rows.sort_by(|a, b| {
        a.controller
            .cmp(&b.controller)
            .then(a.cell.cmp_key(&b.cell))
            .then(a.seed.cmp(&b.seed))
    });
    let mut matrix: Vec<GridVerdict> = Vec::new();
    for r in &rows {
        match matrix.last_mut() {
            Some(v) if v.controller == r.controller && v.cell == r.cell => {
                v.trials += 1;
                v.successes += usize::from(r.success);
            }
            _ => matrix.push(GridVerdict {
                controller: r.controller,
                cell: r.cell,
                successes: usize::from(r.success),
                trials: 1,
                success: false,
            }),
        }
    }
    for v in &mut matrix {
        v.success = majority(v.successes, v.trials);
    }
    Ok(GridReport { rows, matrix })
}
