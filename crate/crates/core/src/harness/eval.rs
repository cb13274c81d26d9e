//! Episode rollouts and the success criterion.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::control::Controller;
use crate::dynamics::BlimpParams;
use crate::env::{InvertEnv, StepRecord};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuccessCriterion {
    /// Bound on Δφ = π - |φ|, rad.
    pub roll_tol: f64,
    /// Bound on |θ|, rad.
    pub pitch_tol: f64,
    /// Hold window at the end of the episode, s.
    pub window: f64,
    /// Episode length, s.
    pub horizon: f64,
}

impl Default for SuccessCriterion {
    fn default() -> Self {
        Self {
            roll_tol: 0.2,
            pitch_tol: 0.3,
            window: 5.0,
            horizon: 30.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub success: bool,
    /// Start of the final uninterrupted hold, if the trace ends holding.
    pub time_to_inversion: Option<f64>,
    /// Δφ at the last sample.
    pub final_roll_deviation: f64,
}

impl SuccessCriterion {
    pub fn validate(&self) -> Result<()> {
        if !(self.roll_tol > 0.0 && self.pitch_tol > 0.0 && self.window > 0.0) {
            return Err(Error::invalid("success tolerances and window must be positive"));
        }
        if self.window > self.horizon {
            return Err(Error::invalid("hold window exceeds horizon"));
        }
        Ok(())
    }

    pub fn holds(&self, roll: f64, pitch: f64) -> bool {
        PI - roll.abs() < self.roll_tol && pitch.abs() < self.pitch_tol
    }

    /// Judges a trace of `(t, roll, pitch)` samples. The hold start is the
    /// time of the last sample before the final run of holding samples
    /// (0 if the trace holds throughout).
    pub fn judge(&self, samples: impl IntoIterator<Item = (f64, f64, f64)>) -> Verdict {
        let mut hold_start: Option<f64> = None;
        let mut prev_t = 0.0;
        let mut last_t = 0.0;
        let mut last_dev = f64::NAN;
        let mut any = false;
        for (t, roll, pitch) in samples {
            any = true;
            if self.holds(roll, pitch) {
                hold_start.get_or_insert(prev_t);
            } else {
                hold_start = None;
            }
            prev_t = t;
            last_t = t;
            last_dev = PI - roll.abs();
        }
        let covered = any && last_t >= self.horizon - 1e-9;
        let success = covered && hold_start.is_some_and(|s| last_t - s >= self.window - 1e-9);
        Verdict {
            success,
            time_to_inversion: hold_start,
            final_roll_deviation: last_dev,
        }
    }

    pub fn judge_records(&self, records: &[StepRecord]) -> Verdict {
        self.judge(records.iter().map(|r| (r.t, r.euler[0], r.euler[1])))
    }
}

/// Runs `controller` from upright rest for `duration` seconds and records
/// every control step. Over-range termination still ends the trace if the
/// env is configured for it.
pub fn rollout<C: Controller + ?Sized>(
    env: &mut InvertEnv,
    controller: &mut C,
    plant: BlimpParams,
    yaw: f64,
    duration: f64,
) -> Result<Vec<StepRecord>> {
    env.reset_with(plant, yaw)?;
    controller.reset();
    let steps = (duration / env.config().control_period).round() as usize;
    let mut records = Vec::with_capacity(steps);
    for _ in 0..steps {
        let a = controller.act(env.state(), env.time());
        let r = env.step(&a);
        records.push(StepRecord::capture(env, &a, &r));
        if r.terminated {
            break;
        }
    }
    Ok(records)
}

/// Moving average over a trailing window (shorter at the start).
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    assert!(window >= 1, "window must be at least 1");
    let mut out = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    for i in 0..values.len() {
        sum += values[i];
        if i >= window {
            sum -= values[i - window];
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    out
}

/// First 1-based episode whose trailing-window average reaches `threshold`,
/// counting only indices where the window is full.
pub fn episodes_to_convergence(returns: &[f64], window: usize, threshold: f64) -> Option<usize> {
    moving_average(returns, window)
        .iter()
        .enumerate()
        .skip(window - 1)
        .find(|(_, v)| **v >= threshold)
        .map(|(i, _)| i + 1)
}
