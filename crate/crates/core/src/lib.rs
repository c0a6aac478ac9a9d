//! Episodic control with grid-based state abstraction.
//!
//! Concrete state (or state-action) vectors are discretized onto a uniform
//! grid, consecutive grid cells are grouped into short patterns, and an
//! episodic memory keeps, per pattern, the mean return of the episodes it
//! occurred in. That reward-confidence score, normalized to `[0, 1]`,
//! revises the extrinsic reward before a transition enters the replay buffer:
//!
//! ```text
//! r_hat = r + (score(pattern) - mean score) * epsilon
//! ```
//!
//! The crate is organized as:
//!
//! - [`abstraction`]: bounded vectors, Gaussian random projection, grid keys
//!   and multi-step pattern keys.
//! - [`memory`]: the pattern -> score key-value memory, its aggregates,
//!   visit-density statistics and text snapshots.
//! - [`shaping`]: reward revision and the per-step / per-episode hooks.
//! - [`agents`]: a from-scratch deterministic actor-critic (TD3 / DDPG) and a
//!   tabular Q-learner.
//! - [`envs`]: small seeded environments with sparse rewards.
//! - [`harness`]: config files, seeded runs, ablation grids and reports.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod abstraction;
pub mod agents;
pub mod envs;
mod error;
pub mod harness;
pub mod memory;
pub mod shaping;

pub use error::{Error, Result};
