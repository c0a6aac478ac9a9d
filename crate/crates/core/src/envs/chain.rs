use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Action, EnvSpec, Environment, RewardStructure, Step};
use crate::error::{Error, Result};

pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;
const RIGHT_SUCCESS: f64 = 0.9;

/// Positions `0..len`; `right` advances with probability 0.9 (otherwise
/// stays), `left` moves back. Reaching the last state pays 1 and ends the
/// episode.
#[derive(Debug, Clone)]
pub struct ChainMdp {
    spec: EnvSpec,
    len: usize,
    position: usize,
    t: usize,
    over: bool,
    rng: ChaCha8Rng,
}

impl ChainMdp {
    pub fn new(len: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::Config(format!(
                "chain length must be >= 2, got {len}"
            )));
        }
        Ok(Self {
            spec: EnvSpec {
                name: format!("chain-{len}"),
                state_dim: 1,
                action_dim: 0,
                action_count: 2,
                discrete_states: len,
                state_lower: vec![-0.5],
                state_upper: vec![len as f64 - 0.5],
                action_lower: vec![-0.5],
                action_upper: vec![1.5],
                horizon: 100,
                reward: RewardStructure::Sparse,
                success_threshold: 0.8,
            },
            len,
            position: 0,
            t: 0,
            over: true,
            rng: ChaCha8Rng::seed_from_u64(0),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl Environment for ChainMdp {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.position = 0;
        self.t = 0;
        self.over = false;
        vec![0.0]
    }

    fn step(&mut self, action: &Action) -> Result<Step> {
        if self.over {
            return Err(Error::Env("step called on a finished episode".into()));
        }
        let a = match action {
            Action::Discrete(a) if *a < 2 => *a,
            Action::Discrete(a) => {
                return Err(Error::Env(format!("action index {a} out of range 2")))
            }
            Action::Continuous(_) => return Err(Error::Env("chain takes discrete actions".into())),
        };
        // one draw per step keeps the stream aligned across policies
        let advance = self.rng.random::<f64>() < RIGHT_SUCCESS;
        if a == RIGHT {
            if advance {
                self.position += 1;
            }
        } else {
            self.position = self.position.saturating_sub(1);
        }
        self.t += 1;
        let done = self.position == self.len - 1;
        let truncated = !done && self.t >= self.spec.horizon;
        self.over = done || truncated;
        Ok(Step {
            state: vec![self.position as f64],
            reward: if done { 1.0 } else { 0.0 },
            done,
            truncated,
        })
    }
}
