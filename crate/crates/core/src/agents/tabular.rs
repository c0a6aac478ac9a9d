use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Agent, AgentConfig, TrainStats};
use crate::envs::Action;
use crate::error::{Error, Result};
use crate::shaping::RevisedTransition;

/// One-step Q-learning over integer states and actions:
/// `Q[s,a] += alpha * (r + gamma * (1 - done) * max_a' Q[s',a'] - Q[s,a])`.
#[derive(Debug, Clone)]
pub struct TabularQ {
    n_states: usize,
    n_actions: usize,
    q: Vec<f64>,
    alpha: f64,
    gamma: f64,
    explore_rate: f64,
    rng: ChaCha8Rng,
}

impl TabularQ {
    pub fn new(config: &AgentConfig, n_states: usize, n_actions: usize, seed: u64) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::InvalidArgument(
                "tabular Q needs states and actions".into(),
            ));
        }
        Ok(Self {
            n_states,
            n_actions,
            q: vec![config.q_init; n_states * n_actions],
            alpha: config.learning_rate,
            gamma: config.gamma,
            explore_rate: config.explore_rate,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn q(&self, state: usize, action: usize) -> f64 {
        self.q[state * self.n_actions + action]
    }

    pub fn values(&self) -> &[f64] {
        &self.q
    }

    fn row(&self, state: usize) -> &[f64] {
        &self.q[state * self.n_actions..(state + 1) * self.n_actions]
    }

    /// Lowest-index maximizer.
    pub fn greedy_action(&self, state: usize) -> usize {
        let row = self.row(state);
        let mut best = 0;
        for a in 1..row.len() {
            if row[a] > row[best] {
                best = a;
            }
        }
        best
    }

    pub fn update(
        &mut self,
        state: usize,
        action: usize,
        reward: f64,
        next_state: usize,
        done: bool,
    ) -> Result<()> {
        for (index, bound) in [(state, self.n_states), (next_state, self.n_states)] {
            if index >= bound {
                return Err(Error::InvalidArgument(format!(
                    "state {index} out of range {bound}"
                )));
            }
        }
        if action >= self.n_actions {
            return Err(Error::InvalidArgument(format!(
                "action {action} out of range {}",
                self.n_actions
            )));
        }
        let future = if done {
            0.0
        } else {
            self.row(next_state)
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let slot = state * self.n_actions + action;
        let target = reward + self.gamma * future;
        self.q[slot] += self.alpha * (target - self.q[slot]);
        if !self.q[slot].is_finite() {
            return Err(Error::Diverged {
                update: 0,
                message: format!("Q[{state},{action}] is {}", self.q[slot]),
            });
        }
        Ok(())
    }

    fn index(&self, state: &[f64]) -> usize {
        (state[0].round().max(0.0) as usize).min(self.n_states - 1)
    }

    fn random_tie_break(&mut self, state: usize) -> usize {
        let row = &self.q[state * self.n_actions..(state + 1) * self.n_actions];
        let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<usize> = (0..row.len()).filter(|&a| row[a] == best).collect();
        ties[self.rng.random_range(0..ties.len())]
    }
}

impl Agent for TabularQ {
    fn act(&mut self, state: &[f64], explore: bool) -> Action {
        let s = self.index(state);
        if !explore {
            return Action::Discrete(self.greedy_action(s));
        }
        if self.rng.random::<f64>() < self.explore_rate {
            Action::Discrete(self.rng.random_range(0..self.n_actions))
        } else {
            Action::Discrete(self.random_tie_break(s))
        }
    }

    fn greedy(&self, state: &[f64]) -> Action {
        Action::Discrete(self.greedy_action(self.index(state)))
    }

    fn random_action(&mut self) -> Action {
        Action::Discrete(self.rng.random_range(0..self.n_actions))
    }

    fn observe(&mut self, transition: &RevisedTransition) -> Result<()> {
        let action = transition.action.values()[0].round() as usize;
        self.update(
            self.index(transition.state.values()),
            action,
            transition.reward,
            self.index(transition.next_state.values()),
            transition.done,
        )
    }

    fn train(&mut self) -> Result<Option<TrainStats>> {
        // learning happens online in `observe`
        Ok(None)
    }

    fn q_estimate(&self, state: &[f64], action: &Action) -> f64 {
        let a = match action {
            Action::Discrete(a) => *a,
            Action::Continuous(v) => v[0].round() as usize,
        };
        self.q(self.index(state), a.min(self.n_actions - 1))
    }

    fn warmup_steps(&self) -> usize {
        0
    }
}
