//! Run configuration, evaluation, ablation and artifact output.

mod ablate;
mod artifacts;
mod config;
mod eval;
mod grid;
mod pool;
mod rollout;
mod train;

pub use ablate::{run_ablation, AblationRun, AblationSpec, AblationSummary, Variant, VariantSummary};
pub use artifacts::{load_actor, Artifact, RunDir, CHECKPOINT_VERSION};
pub use config::RunConfig;
pub use eval::{episodes_to_convergence, moving_average, rollout, SuccessCriterion, Verdict};
pub use grid::{
    evaluate_cell, run_grid, ControllerKind, GridCell, GridPreset, GridReport, GridRow, GridSpec, GridVerdict,
};
pub use pool::parallel_map;
pub use rollout::{run_rollout, write_records, RolloutController, RolloutSpec};
pub use train::{train, TrainOutcome, TrainSummary, FINAL_CHECKPOINT, POLICY, TIMINGS, TRAIN_LOG};
