//! Learners that consume the (possibly revised) transition stream.
//!
//! - [`ActorCritic`]: deterministic actor-critic with target networks. With
//!   twin critics and delayed policy updates it is TD3; with one critic and
//!   no delay it is DDPG.
//! - [`TabularQ`]: one-step Q-learning for small discrete environments.
//!
//! Both implement [`Agent`], the interface the harness drives, and expose
//! critic estimates for the q-value measurement mode.

mod actor_critic;
mod adam;
pub mod nn;
mod replay;
mod tabular;

pub use actor_critic::{ActorCritic, TrainStats};
pub use adam::Adam;
pub use replay::{Batch, ReplayBuffer};
pub use tabular::TabularQ;

use serde::{Deserialize, Serialize};

use crate::envs::{Action, EnvSpec};
use crate::error::{Error, Result};
use crate::shaping::RevisedTransition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Td3,
    Ddpg,
    Tabular,
}

impl std::fmt::Display for AgentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AgentKind::Td3 => "td3",
            AgentKind::Ddpg => "ddpg",
            AgentKind::Tabular => "tabular",
        })
    }
}

impl std::str::FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "td3" => Ok(AgentKind::Td3),
            "ddpg" => Ok(AgentKind::Ddpg),
            "tabular" => Ok(AgentKind::Tabular),
            other => Err(Error::InvalidArgument(format!(
                "unknown agent {other:?} (expected td3, ddpg or tabular)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgentConfig {
    pub gamma: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    /// Target smoothing coefficient.
    pub tau: f64,
    /// Std of the Gaussian exploration noise, in units of half the action
    /// range.
    pub exploration_noise: f64,
    pub twin_critics: bool,
    pub policy_delay: usize,
    /// Std of the target-policy smoothing noise; 0 disables it.
    pub target_noise: f64,
    pub target_noise_clip: f64,
    pub hidden: Vec<usize>,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Uniformly random actions before the policy takes over.
    pub warmup_steps: usize,
    /// Tabular step size.
    pub learning_rate: f64,
    /// Tabular epsilon-greedy rate.
    pub explore_rate: f64,
    /// Initial tabular Q value.
    pub q_init: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            actor_lr: 3e-4,
            critic_lr: 3e-4,
            tau: 0.005,
            exploration_noise: 0.1,
            twin_critics: true,
            policy_delay: 2,
            target_noise: 0.0,
            target_noise_clip: 0.5,
            hidden: vec![256, 256],
            batch_size: 100,
            buffer_capacity: 100_000,
            warmup_steps: 1_000,
            learning_rate: 0.1,
            explore_rate: 0.1,
            q_init: 0.0,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(0.0..1.0).contains(&self.gamma) {
            return fail(format!("gamma must lie in [0, 1), got {}", self.gamma));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return fail(format!("tau must lie in (0, 1], got {}", self.tau));
        }
        if self.policy_delay == 0 {
            return fail("policy_delay must be >= 1".into());
        }
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return fail(format!(
                "need 0 < batch_size ({}) <= buffer_capacity ({})",
                self.batch_size, self.buffer_capacity
            ));
        }
        if self.hidden.contains(&0) {
            return fail("hidden widths must be positive".into());
        }
        for (name, v) in [
            ("actor_lr", self.actor_lr),
            ("critic_lr", self.critic_lr),
            ("exploration_noise", self.exploration_noise),
            ("target_noise", self.target_noise),
            ("target_noise_clip", self.target_noise_clip),
            ("learning_rate", self.learning_rate),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return fail(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if !(0.0..=1.0).contains(&self.explore_rate) {
            return fail(format!(
                "explore_rate must lie in [0, 1], got {}",
                self.explore_rate
            ));
        }
        Ok(())
    }
}

/// What the training loop needs from a learner.
pub trait Agent: Send {
    /// Action for `state`; exploration noise only when `explore` is set.
    fn act(&mut self, state: &[f64], explore: bool) -> Action;

    /// Deterministic action, no randomness consumed.
    fn greedy(&self, state: &[f64]) -> Action;

    /// Uniformly random action, used during warm-up.
    fn random_action(&mut self) -> Action;

    /// Hands over one revised transition.
    fn observe(&mut self, transition: &RevisedTransition) -> Result<()>;

    /// One learning step; `None` when there is not enough data yet.
    fn train(&mut self) -> Result<Option<TrainStats>>;

    /// Current critic value of `(state, action)`.
    fn q_estimate(&self, state: &[f64], action: &Action) -> f64;

    fn warmup_steps(&self) -> usize;
}

/// Builds the learner for `kind` on `spec`, seeded by `seed`.
pub fn build_agent(
    kind: AgentKind,
    config: &AgentConfig,
    spec: &EnvSpec,
    seed: u64,
) -> Result<Box<dyn Agent>> {
    config.validate()?;
    match kind {
        AgentKind::Td3 | AgentKind::Ddpg => {
            if spec.is_discrete_action() {
                return Err(Error::Config(format!(
                    "{kind} needs continuous actions; {} is discrete",
                    spec.name
                )));
            }
            let mut config = config.clone();
            if kind == AgentKind::Ddpg {
                config.twin_critics = false;
                config.policy_delay = 1;
            }
            Ok(Box::new(ActorCritic::new(
                config,
                spec.state_dim,
                &spec.action_lower,
                &spec.action_upper,
                seed,
            )?))
        }
        AgentKind::Tabular => {
            if !spec.is_discrete_action() || spec.discrete_states == 0 {
                return Err(Error::Config(format!(
                    "tabular learning needs discrete states and actions; {} is continuous",
                    spec.name
                )));
            }
            Ok(Box::new(TabularQ::new(
                config,
                spec.discrete_states,
                spec.action_count,
                seed,
            )?))
        }
    }
}
