use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{continuous_action, Action, EnvSpec, Environment, RewardStructure, Step};
use crate::error::{Error, Result};

const GOAL: [f64; 2] = [0.9, 0.9];
const GOAL_RADIUS: f64 = 0.1;
const START: [f64; 2] = [-0.9, -0.9];
const JITTER: f64 = 0.02;
const DAMPING: f64 = 0.95;
const MAX_ACCEL: f64 = 0.1;

/// A damped point in the unit box that must reach the far corner.
///
/// `v <- clamp(0.95 v + a)`, `p <- clamp(p + v)`; reward 1 and termination
/// once `|p - (0.9, 0.9)| < 0.1`, otherwise 0.
#[derive(Debug, Clone)]
pub struct SparsePointMass {
    spec: EnvSpec,
    state: [f64; 4],
    t: usize,
    over: bool,
}

impl SparsePointMass {
    pub fn new() -> Self {
        Self {
            spec: EnvSpec {
                name: "sparse_point_mass".into(),
                state_dim: 4,
                action_dim: 2,
                action_count: 0,
                discrete_states: 0,
                state_lower: vec![-1.0; 4],
                state_upper: vec![1.0; 4],
                action_lower: vec![-MAX_ACCEL; 2],
                action_upper: vec![MAX_ACCEL; 2],
                horizon: 200,
                reward: RewardStructure::Sparse,
                success_threshold: 0.8,
            },
            state: [0.0; 4],
            t: 0,
            over: true,
        }
    }

    pub fn position(&self) -> [f64; 2] {
        [self.state[0], self.state[1]]
    }
}

impl Default for SparsePointMass {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for SparsePointMass {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.state = [
            START[0] + rng.random_range(-JITTER..=JITTER),
            START[1] + rng.random_range(-JITTER..=JITTER),
            0.0,
            0.0,
        ];
        self.t = 0;
        self.over = false;
        self.state.to_vec()
    }

    fn step(&mut self, action: &Action) -> Result<Step> {
        if self.over {
            return Err(Error::Env("step called on a finished episode".into()));
        }
        let a = continuous_action(action, &self.spec.action_lower, &self.spec.action_upper)?;
        for k in 0..2 {
            let v = (DAMPING * self.state[2 + k] + a[k]).clamp(-1.0, 1.0);
            self.state[2 + k] = v;
            self.state[k] = (self.state[k] + v).clamp(-1.0, 1.0);
        }
        self.t += 1;
        let dist = (self.state[0] - GOAL[0]).hypot(self.state[1] - GOAL[1]);
        let done = dist < GOAL_RADIUS;
        let truncated = !done && self.t >= self.spec.horizon;
        self.over = done || truncated;
        Ok(Step {
            state: self.state.to_vec(),
            reward: if done { 1.0 } else { 0.0 },
            done,
            truncated,
        })
    }
}
