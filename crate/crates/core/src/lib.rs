//! Simulation and learning stack for driving a miniature blimp robot from
//! its upright rest pose to the inverted pose and holding it there.
//!
//! The crate is organized bottom-up:
//!
//! - [`so3`]: rotation matrices, axis-angle error, attitude integration.
//! - [`dynamics`]: the blimp's mass geometry, motor curve, allocation and
//!   rigid-body model.
//! - [`env`]: the episodic inversion environment and its reward.
//! - [`td3`]: networks, multi-buffer replay, collection and training.
//! - [`control`]: the energy-shaping baseline, PD stabilizer and the
//!   deployment mapping layer.
//! - [`harness`]: configuration, evaluation grids, ablations and artifacts.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod dynamics;
pub mod env;
mod error;
pub mod harness;
pub mod so3;
pub mod td3;

pub use error::{Error, Result};
