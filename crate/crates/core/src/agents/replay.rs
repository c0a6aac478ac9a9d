use ndarray::{Array1, Array2};
use rand::Rng;

use crate::error::{Error, Result};

/// A sampled minibatch, one transition per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub states: Array2<f64>,
    pub actions: Array2<f64>,
    pub rewards: Array1<f64>,
    pub next_states: Array2<f64>,
    /// 1.0 for terminal transitions.
    pub dones: Array1<f64>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

/// Fixed-capacity FIFO ring of transitions with uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    state_dim: usize,
    action_dim: usize,
    states: Vec<f64>,
    actions: Vec<f64>,
    rewards: Vec<f64>,
    next_states: Vec<f64>,
    dones: Vec<f64>,
    len: usize,
    // slot the next push writes to
    head: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, state_dim: usize, action_dim: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            state_dim,
            action_dim,
            states: vec![0.0; capacity * state_dim],
            actions: vec![0.0; capacity * action_dim],
            rewards: vec![0.0; capacity],
            next_states: vec![0.0; capacity * state_dim],
            dones: vec![0.0; capacity],
            len: 0,
            head: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(
        &mut self,
        state: &[f64],
        action: &[f64],
        reward: f64,
        next_state: &[f64],
        done: bool,
    ) -> Result<()> {
        for (got, expected) in [
            (state.len(), self.state_dim),
            (action.len(), self.action_dim),
            (next_state.len(), self.state_dim),
        ] {
            if got != expected {
                return Err(Error::DimensionMismatch { expected, got });
            }
        }
        let i = self.head;
        let (ds, da) = (self.state_dim, self.action_dim);
        self.states[i * ds..(i + 1) * ds].copy_from_slice(state);
        self.actions[i * da..(i + 1) * da].copy_from_slice(action);
        self.next_states[i * ds..(i + 1) * ds].copy_from_slice(next_state);
        self.rewards[i] = reward;
        self.dones[i] = if done { 1.0 } else { 0.0 };
        self.head = (self.head + 1) % self.capacity;
        self.len = (self.len + 1).min(self.capacity);
        Ok(())
    }

    fn slot(&self, age: usize) -> usize {
        // age 0 is the oldest stored transition
        (self.head + self.capacity - self.len + age) % self.capacity
    }

    /// Reward of the `age`-th oldest stored transition.
    pub fn reward_at(&self, age: usize) -> Option<f64> {
        (age < self.len).then(|| self.rewards[self.slot(age)])
    }

    /// Rewards from oldest to newest.
    pub fn rewards(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|age| self.rewards[self.slot(age)])
    }

    /// Uniform sample with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, batch_size: usize, rng: &mut R) -> Result<Batch> {
        if self.len < batch_size || batch_size == 0 {
            return Err(Error::InvalidArgument(format!(
                "cannot sample {batch_size} from {} transitions",
                self.len
            )));
        }
        let (ds, da) = (self.state_dim, self.action_dim);
        let mut batch = Batch {
            states: Array2::zeros((batch_size, ds)),
            actions: Array2::zeros((batch_size, da)),
            rewards: Array1::zeros(batch_size),
            next_states: Array2::zeros((batch_size, ds)),
            dones: Array1::zeros(batch_size),
        };
        for row in 0..batch_size {
            let i = self.slot(rng.random_range(0..self.len));
            copy_row(&mut batch.states, row, &self.states[i * ds..(i + 1) * ds]);
            copy_row(&mut batch.actions, row, &self.actions[i * da..(i + 1) * da]);
            copy_row(
                &mut batch.next_states,
                row,
                &self.next_states[i * ds..(i + 1) * ds],
            );
            batch.rewards[row] = self.rewards[i];
            batch.dones[row] = self.dones[i];
        }
        Ok(batch)
    }
}

fn copy_row(dst: &mut Array2<f64>, row: usize, src: &[f64]) {
    for (d, &s) in dst.row_mut(row).iter_mut().zip(src) {
        *d = s;
    }
}
