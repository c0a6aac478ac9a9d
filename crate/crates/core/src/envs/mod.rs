//! Seeded toy environments with sparse rewards.
//!
//! | name | state | action | reward | horizon |
//! |---|---|---|---|---|
//! | `sparse_point_mass` | `(x, y, vx, vy)` in `[-1, 1]^4` | `[-0.1, 0.1]^2` | +1 inside the goal disk | 200 |
//! | `sparse_mountain_car` | position, velocity | `[-1, 1]` | -0.01 per step, +10 at the goal | 500 |
//! | `chain` / `chain-<L>` | integer position | left / right | 1 at the last state | 100 |
//!
//! `reset(seed)` fixes all randomness of the following episode, so a seed and
//! an action stream determine the trajectory.

mod chain;
mod mountain_car;
mod point_mass;

pub use chain::{ChainMdp, LEFT, RIGHT};
pub use mountain_car::SparseMountainCar;
pub use point_mass::SparsePointMass;

use crate::abstraction::BoundedVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Continuous(Vec<f64>),
    Discrete(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardStructure {
    Dense,
    Sparse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub name: String,
    pub state_dim: usize,
    /// 0 for discrete actions.
    pub action_dim: usize,
    /// 0 for continuous actions.
    pub action_count: usize,
    /// Number of integer states for tabular learners; 0 when continuous.
    pub discrete_states: usize,
    pub state_lower: Vec<f64>,
    pub state_upper: Vec<f64>,
    /// For discrete actions, a single dimension `[-0.5, count - 0.5]` that
    /// holds the action index.
    pub action_lower: Vec<f64>,
    pub action_upper: Vec<f64>,
    pub horizon: usize,
    pub reward: RewardStructure,
    /// Mean evaluation return that counts as solved.
    pub success_threshold: f64,
}

impl EnvSpec {
    pub fn is_discrete_action(&self) -> bool {
        self.action_count > 0
    }

    pub fn state_vector(&self, values: Vec<f64>) -> Result<BoundedVector> {
        BoundedVector::new(values, self.state_lower.clone(), self.state_upper.clone())
    }

    pub fn action_vector(&self, action: &Action) -> Result<BoundedVector> {
        let values = match action {
            Action::Continuous(v) => v.clone(),
            Action::Discrete(i) => vec![*i as f64],
        };
        BoundedVector::new(values, self.action_lower.clone(), self.action_upper.clone())
    }

    pub fn contains_state(&self, state: &[f64]) -> bool {
        state.len() == self.state_dim
            && state
                .iter()
                .zip(self.state_lower.iter().zip(&self.state_upper))
                .all(|(x, (lo, hi))| lo <= x && x <= hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub state: Vec<f64>,
    pub reward: f64,
    /// Reached a terminal state.
    pub done: bool,
    /// Hit the horizon without terminating.
    pub truncated: bool,
}

impl Step {
    pub fn episode_over(&self) -> bool {
        self.done || self.truncated
    }
}

pub trait Environment: Send {
    fn spec(&self) -> &EnvSpec;

    fn reset(&mut self, seed: u64) -> Vec<f64>;

    fn step(&mut self, action: &Action) -> Result<Step>;
}

/// `sparse_point_mass`, `sparse_mountain_car`, `chain` (length 20) or
/// `chain-<L>`.
pub fn make_env(name: &str) -> Result<Box<dyn Environment>> {
    match name {
        "sparse_point_mass" => Ok(Box::new(SparsePointMass::new())),
        "sparse_mountain_car" => Ok(Box::new(SparseMountainCar::new())),
        "chain" => Ok(Box::new(ChainMdp::new(20)?)),
        other => match other.strip_prefix("chain-").map(str::parse::<usize>) {
            Some(Ok(len)) => Ok(Box::new(ChainMdp::new(len)?)),
            _ => Err(Error::Config(format!("unknown environment {other:?}"))),
        },
    }
}

pub(crate) fn continuous_action(action: &Action, lower: &[f64], upper: &[f64]) -> Result<Vec<f64>> {
    match action {
        Action::Continuous(v) if v.len() == lower.len() => {
            if let Some(bad) = v.iter().find(|x| x.is_nan()) {
                return Err(Error::Env(format!("action component is {bad}")));
            }
            Ok(v.iter()
                .zip(lower.iter().zip(upper))
                .map(|(x, (lo, hi))| x.clamp(*lo, *hi))
                .collect())
        }
        Action::Continuous(v) => Err(Error::DimensionMismatch {
            expected: lower.len(),
            got: v.len(),
        }),
        Action::Discrete(_) => Err(Error::Env(
            "continuous environment got a discrete action".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry() {
        for name in [
            "sparse_point_mass",
            "sparse_mountain_car",
            "chain",
            "chain-5",
        ] {
            let env = make_env(name).unwrap();
            assert!(env.spec().horizon >= 1);
        }
        assert_eq!(make_env("chain-7").unwrap().spec().discrete_states, 7);
        assert!(make_env("walker").is_err());
        assert!(make_env("chain-x").is_err());
    }
}
