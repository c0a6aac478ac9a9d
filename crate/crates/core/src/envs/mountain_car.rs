use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{continuous_action, Action, EnvSpec, Environment, RewardStructure, Step};
use crate::error::{Error, Result};

const MIN_POSITION: f64 = -1.2;
const MAX_POSITION: f64 = 0.6;
const MAX_SPEED: f64 = 0.07;
const GOAL_POSITION: f64 = 0.45;
const POWER: f64 = 0.001;

/// Continuous mountain car with a sparse goal bonus: -0.01 per step, +10 on
/// reaching position 0.45.
#[derive(Debug, Clone)]
pub struct SparseMountainCar {
    spec: EnvSpec,
    position: f64,
    velocity: f64,
    t: usize,
    over: bool,
}

impl SparseMountainCar {
    pub fn new() -> Self {
        Self {
            spec: EnvSpec {
                name: "sparse_mountain_car".into(),
                state_dim: 2,
                action_dim: 1,
                action_count: 0,
                discrete_states: 0,
                state_lower: vec![MIN_POSITION, -MAX_SPEED],
                state_upper: vec![MAX_POSITION, MAX_SPEED],
                action_lower: vec![-1.0],
                action_upper: vec![1.0],
                horizon: 500,
                reward: RewardStructure::Sparse,
                success_threshold: 5.0,
            },
            position: 0.0,
            velocity: 0.0,
            t: 0,
            over: true,
        }
    }
}

impl Default for SparseMountainCar {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for SparseMountainCar {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.position = rng.random_range(-0.6..=-0.4);
        self.velocity = 0.0;
        self.t = 0;
        self.over = false;
        vec![self.position, self.velocity]
    }

    fn step(&mut self, action: &Action) -> Result<Step> {
        if self.over {
            return Err(Error::Env("step called on a finished episode".into()));
        }
        let force = continuous_action(action, &self.spec.action_lower, &self.spec.action_upper)?[0];
        self.velocity = (self.velocity + POWER * force - 0.0025 * (3.0 * self.position).cos())
            .clamp(-MAX_SPEED, MAX_SPEED);
        self.position = (self.position + self.velocity).clamp(MIN_POSITION, MAX_POSITION);
        if self.position == MIN_POSITION && self.velocity < 0.0 {
            self.velocity = 0.0;
        }
        self.t += 1;
        let done = self.position >= GOAL_POSITION;
        let truncated = !done && self.t >= self.spec.horizon;
        self.over = done || truncated;
        Ok(Step {
            state: vec![self.position, self.velocity],
            reward: -0.01 + if done { 10.0 } else { 0.0 },
            done,
            truncated,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rollout(
        env: &mut SparseMountainCar,
        seed: u64,
        policy: impl Fn(&[f64]) -> f64,
    ) -> (f64, usize, bool) {
        let mut s = env.reset(seed);
        let mut total = 0.0;
        for t in 1.. {
            let out = env.step(&Action::Continuous(vec![policy(&s)])).unwrap();
            assert!(env.spec().contains_state(&out.state));
            total += out.reward;
            if out.episode_over() {
                return (total, t, out.done);
            }
            s = out.state;
        }
        unreachable!()
    }

    #[test]
    fn idle_car_times_out() {
        let mut env = SparseMountainCar::new();
        let (ret, len, done) = rollout(&mut env, 0, |_| 0.0);
        assert!(!done);
        assert_eq!(len, 500);
        assert!((ret + 5.0).abs() < 1e-9);
    }

    #[test]
    fn energy_pumping_reaches_goal() {
        let mut env = SparseMountainCar::new();
        for seed in 0..5 {
            let (ret, len, done) = rollout(&mut env, seed, |s| s[1].signum());
            assert!(done, "seed {seed}");
            assert!((ret - (10.0 - 0.01 * len as f64)).abs() < 1e-9);
        }
    }

    #[test]
    fn step_after_done_fails() {
        let mut env = SparseMountainCar::new();
        rollout(&mut env, 1, |_| 0.0);
        assert!(env.step(&Action::Continuous(vec![0.0])).is_err());
    }
}
