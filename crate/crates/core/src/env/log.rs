//! Per-step rollout CSV.

use std::io::Write;

use crate::so3::euler_from_rotation;
use crate::{Error, Result};

use super::{InvertEnv, StepResult};

/// Column names for the default four-thruster layout.
pub const STEP_HEADER: [&str; 17] = [
    "t", "roll", "pitch", "yaw", "omega_x", "omega_y", "omega_z", "a1", "a2", "a3", "eta1",
    "eta2", "eta3", "eta4", "reward", "terminated", "truncated",
];

/// Formats with 9 significant digits.
pub fn fmt9(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    format!("{:.*e}", 8, v)
        .parse::<f64>()
        .map(|x| format!("{x}"))
        .unwrap_or_else(|_| format!("{v}"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub euler: [f64; 3],
    pub omega: [f64; 3],
    pub action: [f64; 3],
    pub eta: Vec<f64>,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
}

impl StepRecord {
    /// Snapshot of `env` right after a step with `action`.
    pub fn capture(env: &InvertEnv, action: &[f64; 3], result: &StepResult) -> Self {
        let s = env.state();
        let e = euler_from_rotation(&s.rotation);
        Self {
            t: env.time(),
            euler: [e.roll, e.pitch, e.yaw],
            omega: [s.omega.x, s.omega.y, s.omega.z],
            action: *action,
            eta: env.last_command().as_slice().to_vec(),
            reward: result.reward,
            terminated: result.terminated,
            truncated: result.truncated,
        }
    }
}

pub struct StepWriter<W: Write> {
    inner: csv::Writer<W>,
    thrusters: usize,
}

impl<W: Write> StepWriter<W> {
    pub fn new(out: W, thrusters: usize) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        let mut header: Vec<String> = STEP_HEADER[..10].iter().map(|s| s.to_string()).collect();
        header.extend((1..=thrusters).map(|k| format!("eta{k}")));
        header.extend(["reward", "terminated", "truncated"].map(String::from));
        inner.write_record(&header)?;
        Ok(Self { inner, thrusters })
    }

    pub fn write(&mut self, r: &StepRecord) -> Result<()> {
        if r.eta.len() != self.thrusters {
            return Err(Error::invalid(format!(
                "record has {} motor commands, header has {}",
                r.eta.len(),
                self.thrusters
            )));
        }
        let mut row: Vec<String> = Vec::with_capacity(13 + self.thrusters);
        row.push(fmt9(r.t));
        row.extend(r.euler.iter().chain(&r.omega).chain(&r.action).map(|v| fmt9(*v)));
        row.extend(r.eta.iter().map(|v| fmt9(*v)));
        row.push(fmt9(r.reward));
        row.push(u8::from(r.terminated).to_string());
        row.push(u8::from(r.truncated).to_string());
        self.inner.write_record(&row)?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner
            .flush()
            .map_err(|e| Error::io("rollout log", e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt9(std::f64::consts::PI), "3.14159265");
        assert_eq!(fmt9(1.0), "1");
        assert_eq!(fmt9(-0.000123456789123), "-0.000123456789");
        assert_eq!(fmt9(0.0), "0");
    }
}
