//! The baseline over the extra-weight sweep, three yaw seeds per cell.
use blimp_invert::harness::{run_grid, GridPreset, GridSpec, RunConfig};

fn main() -> anyhow::Result<()> {
    let cfg = RunConfig {
        grid: GridSpec { preset: Some(GridPreset::ExtraWeight), ..GridSpec::default() },
        ..RunConfig::default()
    };
    let report = run_grid(&cfg, None, 1)?;
    for v in &report.matrix {
        println!(
            "{} m_w {:.1} g: {}/{} {}",
            v.controller.name(),
            v.cell.extra_weight * 1e3,
            v.successes,
            v.trials,
            if v.success { "success" } else { "failure" }
        );
    }
    Ok(())
}
