//! Intrinsic reward revision driven by the episodic memory.
//!
//! [`ShapingPipeline`] sits between the environment and the replay buffer.
//! For every step it abstracts the concrete input, extracts the pattern that
//! ends at the step, looks the pattern up and revises the reward:
//!
//! ```text
//! r_hat = r + (c_norm - mean_norm) * epsilon
//! ```
//!
//! Unseen patterns (and therefore the whole first episode) get `r_hat = r`.
//! At the end of an episode the collected patterns are scored with the raw,
//! unrevised return, so scores only ever reflect earlier episodes when a
//! reward is revised.

use serde::{Deserialize, Serialize};

use crate::abstraction::{
    build_projection, concat_state_action, discretize, extract_pattern, project, BoundedVector,
    GridKey, PatternKey, ProjectionMatrix,
};
use crate::error::{Error, Result};
use crate::memory::{EpisodicMemory, MeasureMode};

/// Which concrete vector is abstracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbstractMode {
    State,
    StateAction,
}

impl std::fmt::Display for AbstractMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AbstractMode::State => "state",
            AbstractMode::StateAction => "state_action",
        })
    }
}

impl std::str::FromStr for AbstractMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "state" => Ok(AbstractMode::State),
            "state_action" => Ok(AbstractMode::StateAction),
            other => Err(Error::InvalidArgument(format!(
                "unknown abstract mode {other:?} (expected state or state_action)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShapingConfig {
    /// When false, rewards pass through untouched; the memory is still
    /// maintained so telemetry matches a shaped run.
    pub enabled: bool,
    pub epsilon: f64,
    /// Pattern length `m`.
    pub pattern_len: usize,
    /// Intervals per dimension `N`.
    pub grid_count: usize,
    pub abstract_mode: AbstractMode,
    pub measure_mode: MeasureMode,
    /// Inputs wider than this are projected before discretization.
    pub projection_threshold: usize,
    pub projection_dim: usize,
    /// Projected components are discretized within `[-bound, bound]`.
    pub projection_bound: f64,
}

impl Default for ShapingConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            epsilon: 0.2,
            pattern_len: 3,
            grid_count: 5,
            abstract_mode: AbstractMode::StateAction,
            measure_mode: MeasureMode::Score,
            projection_threshold: 24,
            projection_dim: 24,
            projection_bound: 10.0,
        }
    }
}

impl ShapingConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return fail(format!(
                "epsilon must be finite and >= 0, got {}",
                self.epsilon
            ));
        }
        if self.pattern_len == 0 {
            return fail("pattern_len must be >= 1".into());
        }
        if !(2..=u16::MAX as usize).contains(&self.grid_count) {
            return fail(format!(
                "grid_count must be in [2, 65535], got {}",
                self.grid_count
            ));
        }
        if self.projection_dim == 0 {
            return fail("projection_dim must be >= 1".into());
        }
        if !(self.projection_bound.is_finite() && self.projection_bound > 0.0) {
            return fail(format!(
                "projection_bound must be > 0, got {}",
                self.projection_bound
            ));
        }
        Ok(())
    }
}

/// `r + (c_norm - mean_norm) * epsilon`, or `r` for an unseen pattern.
pub fn revise_reward(
    reward: f64,
    score: Option<f64>,
    mean_score: f64,
    epsilon: f64,
) -> Result<f64> {
    for (index, value) in [reward, mean_score, epsilon].into_iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { index, value });
        }
    }
    match score {
        None => Ok(reward),
        Some(c) if !c.is_finite() => Err(Error::NonFinite { index: 1, value: c }),
        Some(c) => Ok(reward + (c - mean_score) * epsilon),
    }
}

/// One environment step as seen by the shaping hook.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: BoundedVector,
    pub action: BoundedVector,
    pub reward: f64,
    pub next_state: BoundedVector,
    /// Terminal flag used for bootstrapping. Time-limit truncation is not
    /// terminal.
    pub done: bool,
    pub t: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RevisedTransition {
    pub state: BoundedVector,
    pub action: BoundedVector,
    pub reward_raw: f64,
    pub reward: f64,
    pub next_state: BoundedVector,
    pub done: bool,
    pub t: usize,
}

/// Per-episode totals returned by [`ShapingPipeline::end_episode`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeSummary {
    pub steps: usize,
    pub return_raw: f64,
    pub return_revised: f64,
}

#[derive(Debug, Clone)]
pub struct ShapingPipeline {
    config: ShapingConfig,
    projection: Option<ProjectionMatrix>,
    memory: EpisodicMemory,
    grid_keys: Vec<GridKey>,
    patterns: Vec<PatternKey>,
    rewards: Vec<f64>,
    revised: Vec<f64>,
    q_values: Vec<f64>,
}

impl ShapingPipeline {
    /// `seed` fixes the projection matrix, built once when the abstracted
    /// input is wider than the threshold.
    pub fn new(
        config: ShapingConfig,
        state_dim: usize,
        action_dim: usize,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        let input_dim = match config.abstract_mode {
            AbstractMode::State => state_dim,
            AbstractMode::StateAction => state_dim + action_dim,
        };
        let projection = if input_dim > config.projection_threshold {
            Some(build_projection(seed, input_dim, config.projection_dim)?)
        } else {
            None
        };
        let memory =
            EpisodicMemory::new(config.measure_mode, config.pattern_len, config.grid_count);
        Ok(Self {
            config,
            projection,
            memory,
            grid_keys: Vec::new(),
            patterns: Vec::new(),
            rewards: Vec::new(),
            revised: Vec::new(),
            q_values: Vec::new(),
        })
    }

    pub fn config(&self) -> &ShapingConfig {
        &self.config
    }

    pub fn memory(&self) -> &EpisodicMemory {
        &self.memory
    }

    pub fn projection(&self) -> Option<&ProjectionMatrix> {
        self.projection.as_ref()
    }

    /// Steps buffered for the current episode.
    pub fn episode_len(&self) -> usize {
        self.patterns.len()
    }

    /// Patterns buffered for the current episode, in step order.
    pub fn episode_patterns(&self) -> &[PatternKey] {
        &self.patterns
    }

    /// The grid key of a concrete step under this pipeline's settings.
    pub fn abstract_step(&self, state: &BoundedVector, action: &BoundedVector) -> Result<GridKey> {
        let input = match self.config.abstract_mode {
            AbstractMode::State => state.clone(),
            AbstractMode::StateAction => concat_state_action(state, action),
        };
        let input = match &self.projection {
            Some(matrix) => {
                let bound = self.config.projection_bound;
                BoundedVector::uniform(project(input.values(), matrix)?, -bound, bound)?
            }
            None => input,
        };
        discretize(&input, self.config.grid_count)
    }

    /// Abstracts the step, revises its reward and buffers what the episode
    /// update needs. `q_estimate` is required in q-value mode.
    pub fn step_hook(
        &mut self,
        transition: Transition,
        q_estimate: Option<f64>,
    ) -> Result<RevisedTransition> {
        let key = self.abstract_step(&transition.state, &transition.action)?;
        self.grid_keys.push(key);
        let t = self.grid_keys.len() - 1;
        let pattern = extract_pattern(&self.grid_keys, t, self.config.pattern_len)?;

        let reward = if self.config.enabled {
            match self.memory.mean_normalized_score() {
                Ok(mean) => revise_reward(
                    transition.reward,
                    self.memory.lookup_score(&pattern),
                    mean,
                    self.config.epsilon,
                )?,
                Err(Error::EmptyMemory) => {
                    revise_reward(transition.reward, None, 0.0, self.config.epsilon)?
                }
                Err(e) => return Err(e),
            }
        } else {
            transition.reward
        };

        if self.config.measure_mode == MeasureMode::QValue {
            let q = q_estimate.ok_or_else(|| {
                Error::InvalidArgument(
                    "q-value measurement needs a critic estimate per step".into(),
                )
            })?;
            self.q_values.push(q);
        }
        self.patterns.push(pattern);
        self.rewards.push(transition.reward);
        self.revised.push(reward);

        Ok(RevisedTransition {
            state: transition.state,
            action: transition.action,
            reward_raw: transition.reward,
            reward,
            next_state: transition.next_state,
            done: transition.done,
            t: transition.t,
        })
    }

    /// Scores the buffered episode with its raw return and clears the
    /// per-episode buffers. A zero-length episode is a no-op.
    pub fn end_episode(&mut self) -> Result<EpisodeSummary> {
        let summary = EpisodeSummary {
            steps: self.patterns.len(),
            return_raw: self.rewards.iter().sum(),
            return_revised: self.revised.iter().sum(),
        };
        let result = match self.config.measure_mode {
            MeasureMode::Score => self
                .memory
                .observe_episode(&self.patterns, summary.return_raw),
            MeasureMode::QValue => self
                .memory
                .observe_q_batch(self.patterns.iter().zip(self.q_values.iter().copied())),
        };
        self.grid_keys.clear();
        self.patterns.clear();
        self.rewards.clear();
        self.revised.clear();
        self.q_values.clear();
        result.map(|_| summary)
    }
}
