use std::io::Write;

use ndarray::{concatenate, s, Array1, Array2, ArrayView2, Axis, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::adam::Adam;
use super::nn::{mlp_from_tensors, Activation, Mlp, NamedTensor};
use super::replay::{Batch, ReplayBuffer};
use super::{Agent, AgentConfig};
use crate::envs::Action;
use crate::error::{Error, Result};
use crate::shaping::RevisedTransition;

/// Losses of one [`ActorCritic::update`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainStats {
    /// Mean squared TD error of the first critic.
    pub critic_loss: f64,
    /// `-mean Q(s, actor(s))`, present on policy-update steps.
    pub actor_loss: Option<f64>,
}

/// Deterministic actor-critic with target networks.
///
/// The networks work in a normalized action space `[-1, 1]^d`; actions are
/// mapped to and from environment units at the boundary. Exploration noise
/// is therefore relative to half the action range.
#[derive(Debug, Clone)]
pub struct ActorCritic {
    config: AgentConfig,
    state_dim: usize,
    center: Vec<f64>,
    half_range: Vec<f64>,
    actor: Mlp,
    actor_target: Mlp,
    critics: Vec<Mlp>,
    critic_targets: Vec<Mlp>,
    actor_opt: Adam,
    critic_opts: Vec<Adam>,
    buffer: ReplayBuffer,
    noise_rng: ChaCha8Rng,
    sample_rng: ChaCha8Rng,
    updates: u64,
}

impl ActorCritic {
    pub fn new(
        config: AgentConfig,
        state_dim: usize,
        action_lower: &[f64],
        action_upper: &[f64],
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        if action_lower.len() != action_upper.len() || action_lower.is_empty() {
            return Err(Error::InvalidArgument(
                "action bounds must be non-empty and paired".into(),
            ));
        }
        if action_lower
            .iter()
            .zip(action_upper)
            .any(|(lo, hi)| !(lo < hi))
        {
            return Err(Error::InvalidArgument(
                "action bounds need lower < upper".into(),
            ));
        }
        let action_dim = action_lower.len();
        let stream = |k: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            rng
        };
        let mut init_rng = stream(0);

        let mut actor_sizes = vec![state_dim];
        actor_sizes.extend(&config.hidden);
        actor_sizes.push(action_dim);
        let mut critic_sizes = vec![state_dim + action_dim];
        critic_sizes.extend(&config.hidden);
        critic_sizes.push(1);

        let actor = Mlp::new(&actor_sizes, Activation::Tanh, &mut init_rng)?;
        let n_critics = if config.twin_critics { 2 } else { 1 };
        let critics = (0..n_critics)
            .map(|_| Mlp::new(&critic_sizes, Activation::Identity, &mut init_rng))
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            state_dim,
            center: action_lower
                .iter()
                .zip(action_upper)
                .map(|(l, u)| 0.5 * (l + u))
                .collect(),
            half_range: action_lower
                .iter()
                .zip(action_upper)
                .map(|(l, u)| 0.5 * (u - l))
                .collect(),
            actor_opt: Adam::new(&actor, config.actor_lr),
            critic_opts: critics
                .iter()
                .map(|c| Adam::new(c, config.critic_lr))
                .collect(),
            actor_target: actor.clone(),
            critic_targets: critics.clone(),
            actor,
            critics,
            buffer: ReplayBuffer::new(config.buffer_capacity, state_dim, action_dim),
            noise_rng: stream(1),
            sample_rng: stream(2),
            updates: 0,
            config,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn actor(&self) -> &Mlp {
        &self.actor
    }

    pub fn actor_mut(&mut self) -> &mut Mlp {
        &mut self.actor
    }

    pub fn actor_target(&self) -> &Mlp {
        &self.actor_target
    }

    pub fn actor_target_mut(&mut self) -> &mut Mlp {
        &mut self.actor_target
    }

    pub fn critics(&self) -> &[Mlp] {
        &self.critics
    }

    pub fn critic_targets(&self) -> &[Mlp] {
        &self.critic_targets
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn action_dim(&self) -> usize {
        self.center.len()
    }

    /// Environment units -> `[-1, 1]`.
    pub fn normalize_action(&self, action: &[f64]) -> Vec<f64> {
        action
            .iter()
            .zip(self.center.iter().zip(&self.half_range))
            .map(|(a, (c, h))| ((a - c) / h).clamp(-1.0, 1.0))
            .collect()
    }

    /// `[-1, 1]` -> environment units.
    pub fn denormalize_action(&self, unit: &[f64]) -> Vec<f64> {
        unit.iter()
            .zip(self.center.iter().zip(&self.half_range))
            .map(|(u, (c, h))| c + h * u.clamp(-1.0, 1.0))
            .collect()
    }

    fn policy(&self, state: &[f64]) -> Vec<f64> {
        self.actor
            .forward_one(state)
            .expect("state width matches the actor")
    }

    /// TD targets `r + gamma * (1 - done) * Q_target(s', actor_target(s'))`,
    /// taking the smaller target critic when twins are enabled.
    pub fn td_targets(&mut self, batch: &Batch) -> Result<Array1<f64>> {
        let mut next_actions = self.actor_target.forward(batch.next_states.view())?;
        if self.config.target_noise > 0.0 {
            let normal = Normal::new(0.0, self.config.target_noise).expect("finite std");
            let clip = self.config.target_noise_clip;
            let rng = &mut self.noise_rng;
            next_actions
                .mapv_inplace(|u| (u + normal.sample(rng).clamp(-clip, clip)).clamp(-1.0, 1.0));
        }
        let next_sa = concatenate![Axis(1), batch.next_states, next_actions];
        let mut q_next = self.critic_targets[0]
            .forward(next_sa.view())?
            .column(0)
            .to_owned();
        for target in &self.critic_targets[1..] {
            let other = target.forward(next_sa.view())?;
            Zip::from(&mut q_next)
                .and(other.column(0))
                .for_each(|q, &o| *q = q.min(o));
        }
        let gamma = self.config.gamma;
        let mut y = batch.rewards.clone();
        Zip::from(&mut y)
            .and(&batch.dones)
            .and(&q_next)
            .for_each(|y, &d, &q| *y += gamma * (1.0 - d) * q);
        Ok(y)
    }

    /// One critic step on `batch`; every `policy_delay`-th call also steps
    /// the actor and moves the targets toward the online networks.
    pub fn update(&mut self, batch: &Batch) -> Result<TrainStats> {
        self.updates += 1;
        let n = batch.len() as f64;
        let targets = self.td_targets(batch)?;
        let sa = concatenate![Axis(1), batch.states, batch.actions];

        let mut critic_loss = 0.0;
        for (i, (critic, opt)) in self
            .critics
            .iter_mut()
            .zip(&mut self.critic_opts)
            .enumerate()
        {
            let cache = critic.forward_cached(sa.view())?;
            let diff = &cache.output().column(0) - &targets;
            let loss = diff.mapv(|d| d * d).sum() / n;
            if !loss.is_finite() {
                return Err(Error::Diverged {
                    update: self.updates,
                    message: format!("critic {i} loss is {loss}"),
                });
            }
            if i == 0 {
                critic_loss = loss;
            }
            let grad = diff.mapv(|d| 2.0 * d / n).insert_axis(Axis(1));
            let (grads, _) = critic.backward(&cache, grad.view())?;
            opt.step(critic, &grads);
        }

        let mut actor_loss = None;
        if self.updates % self.config.policy_delay as u64 == 0 {
            actor_loss = Some(self.actor_step(batch.states.view())?);
            let tau = self.config.tau;
            self.actor_target.soft_update(&self.actor, tau);
            for (target, online) in self.critic_targets.iter_mut().zip(&self.critics) {
                target.soft_update(online, tau);
            }
        }
        Ok(TrainStats {
            critic_loss,
            actor_loss,
        })
    }

    fn actor_step(&mut self, states: ArrayView2<'_, f64>) -> Result<f64> {
        let n = states.nrows() as f64;
        let actor_cache = self.actor.forward_cached(states)?;
        let sa = concatenate![Axis(1), states, *actor_cache.output()];
        let critic_cache = self.critics[0].forward_cached(sa.view())?;
        let loss = -critic_cache.output().sum() / n;
        if !loss.is_finite() {
            return Err(Error::Diverged {
                update: self.updates,
                message: format!("actor loss is {loss}"),
            });
        }
        let upstream = Array2::from_elem((states.nrows(), 1), -1.0 / n);
        let (_, d_input) = self.critics[0].backward(&critic_cache, upstream.view())?;
        let d_action = d_input.slice(s![.., self.state_dim..]);
        let (grads, _) = self.actor.backward(&actor_cache, d_action)?;
        self.actor_opt.step(&mut self.actor, &grads);
        Ok(loss)
    }

    /// Writes every network as `name,shape,values...` lines.
    pub fn write_checkpoint<W: Write>(&self, out: &mut W) -> Result<()> {
        self.actor.write_tensors("actor", out)?;
        self.actor_target.write_tensors("actor_target", out)?;
        for (i, (c, t)) in self.critics.iter().zip(&self.critic_targets).enumerate() {
            c.write_tensors(&format!("critic{i}"), out)?;
            t.write_tensors(&format!("critic{i}_target"), out)?;
        }
        Ok(())
    }

    /// Replaces network weights from checkpoint tensors. Optimizer state and
    /// the replay buffer are untouched.
    pub fn load_weights(&mut self, tensors: &[NamedTensor]) -> Result<()> {
        let load = |name: &str, current: &Mlp| -> Result<Mlp> {
            let net = mlp_from_tensors(tensors, name, current.output_activation())?;
            if net.layers().len() != current.layers().len()
                || net
                    .layers()
                    .iter()
                    .zip(current.layers())
                    .any(|(a, b)| a.weights.dim() != b.weights.dim())
            {
                return Err(Error::InvalidArgument(format!(
                    "checkpoint shape mismatch for {name}"
                )));
            }
            Ok(net)
        };
        self.actor = load("actor", &self.actor)?;
        self.actor_target = load("actor_target", &self.actor_target)?;
        for i in 0..self.critics.len() {
            self.critics[i] = load(&format!("critic{i}"), &self.critics[i])?;
            self.critic_targets[i] = load(&format!("critic{i}_target"), &self.critic_targets[i])?;
        }
        Ok(())
    }
}

impl Agent for ActorCritic {
    fn act(&mut self, state: &[f64], explore: bool) -> Action {
        let mut unit = self.policy(state);
        if explore && self.config.exploration_noise > 0.0 {
            let normal = Normal::new(0.0, self.config.exploration_noise).expect("finite std");
            for u in &mut unit {
                *u += normal.sample(&mut self.noise_rng);
            }
        }
        Action::Continuous(self.denormalize_action(&unit))
    }

    fn greedy(&self, state: &[f64]) -> Action {
        Action::Continuous(self.denormalize_action(&self.policy(state)))
    }

    fn random_action(&mut self) -> Action {
        let unit: Vec<f64> = (0..self.action_dim())
            .map(|_| self.noise_rng.random_range(-1.0..=1.0))
            .collect();
        Action::Continuous(self.denormalize_action(&unit))
    }

    fn observe(&mut self, transition: &RevisedTransition) -> Result<()> {
        let unit = self.normalize_action(transition.action.values());
        self.buffer.push(
            transition.state.values(),
            &unit,
            transition.reward,
            transition.next_state.values(),
            transition.done,
        )
    }

    fn train(&mut self) -> Result<Option<TrainStats>> {
        if self.buffer.len() < self.config.batch_size {
            return Ok(None);
        }
        let batch = self
            .buffer
            .sample(self.config.batch_size, &mut self.sample_rng)?;
        self.update(&batch).map(Some)
    }

    fn q_estimate(&self, state: &[f64], action: &Action) -> f64 {
        let unit = match action {
            Action::Continuous(a) => self.normalize_action(a),
            Action::Discrete(i) => vec![*i as f64],
        };
        let input: Vec<f64> = state.iter().chain(&unit).copied().collect();
        self.critics[0]
            .forward_one(&input)
            .expect("critic input width")[0]
    }

    fn warmup_steps(&self) -> usize {
        self.config.warmup_steps
    }
}

#[cfg(test)]
mod tests {
    use ndarray::{array, Array1, Array2};

    use super::*;

    fn small_config() -> AgentConfig {
        AgentConfig {
            hidden: vec![8, 8],
            batch_size: 4,
            buffer_capacity: 64,
            ..AgentConfig::default()
        }
    }

    fn batch(rewards: Array1<f64>, dones: Array1<f64>) -> Batch {
        let n = rewards.len();
        Batch {
            states: Array2::from_shape_fn((n, 2), |(i, j)| 0.1 * (i + j) as f64),
            actions: Array2::from_shape_fn((n, 1), |(i, _)| 0.2 * i as f64 - 0.3),
            rewards,
            next_states: Array2::from_shape_fn((n, 2), |(i, j)| 0.3 - 0.1 * (i * j) as f64),
            dones,
        }
    }

    fn params(net: &Mlp) -> Vec<f64> {
        net.layers()
            .iter()
            .flat_map(|l| {
                l.weights
                    .iter()
                    .chain(l.bias.iter())
                    .copied()
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    #[test]
    fn terminal_targets_are_rewards() {
        let config = AgentConfig {
            gamma: 0.0,
            ..small_config()
        };
        let mut ac = ActorCritic::new(config, 2, &[-1.0], &[1.0], 0).unwrap();
        let r = array![0.5, -1.0, 2.0];
        let y = ac
            .td_targets(&batch(r.clone(), array![1.0, 1.0, 0.0]))
            .unwrap();
        assert_eq!(y, r);
        let mut ac = ActorCritic::new(small_config(), 2, &[-1.0], &[1.0], 0).unwrap();
        let y = ac
            .td_targets(&batch(r.clone(), array![1.0, 1.0, 1.0]))
            .unwrap();
        assert_eq!(y, r);
    }

    #[test]
    fn unit_tau_copies_online_networks() {
        let config = AgentConfig {
            tau: 1.0,
            policy_delay: 1,
            ..small_config()
        };
        let mut ac = ActorCritic::new(config, 2, &[-1.0], &[1.0], 3).unwrap();
        let b = batch(array![1.0, 0.0, 0.5], array![0.0, 0.0, 1.0]);
        for _ in 0..3 {
            ac.update(&b).unwrap();
        }
        assert_eq!(params(ac.actor_target()), params(ac.actor()));
        for (t, c) in ac.critic_targets().iter().zip(ac.critics()) {
            assert_eq!(params(t), params(c));
        }
    }

    #[test]
    fn targets_stay_in_hull_of_online_history() {
        let config = AgentConfig {
            tau: 0.3,
            policy_delay: 2,
            actor_lr: 1e-2,
            critic_lr: 1e-2,
            ..small_config()
        };
        let mut ac = ActorCritic::new(config, 2, &[-1.0], &[1.0], 5).unwrap();
        let b = batch(array![1.0, -0.5, 0.25], array![0.0, 1.0, 0.0]);
        let track = |ac: &ActorCritic| (params(ac.actor()), params(&ac.critics()[1]));
        let (a0, c0) = track(&ac);
        let (mut a_lo, mut a_hi, mut c_lo, mut c_hi) = (a0.clone(), a0, c0.clone(), c0);
        for _ in 0..50 {
            ac.update(&b).unwrap();
            let (a, c) = track(&ac);
            for (k, v) in a.iter().enumerate() {
                a_lo[k] = a_lo[k].min(*v);
                a_hi[k] = a_hi[k].max(*v);
            }
            for (k, v) in c.iter().enumerate() {
                c_lo[k] = c_lo[k].min(*v);
                c_hi[k] = c_hi[k].max(*v);
            }
            let inside = |x: &[f64], lo: &[f64], hi: &[f64]| {
                x.iter()
                    .zip(lo.iter().zip(hi))
                    .all(|(v, (l, h))| *l - 1e-12 <= *v && *v <= *h + 1e-12)
            };
            assert!(inside(&params(ac.actor_target()), &a_lo, &a_hi));
            assert!(inside(&params(&ac.critic_targets()[1]), &c_lo, &c_hi));
        }
    }

    #[test]
    fn seeded_actions_are_reproducible_and_bounded() {
        let lower = [-0.1, -2.0];
        let upper = [0.1, 3.0];
        let config = AgentConfig {
            exploration_noise: 2.0,
            ..small_config()
        };
        let mut a = ActorCritic::new(config.clone(), 3, &lower, &upper, 9).unwrap();
        let mut b = ActorCritic::new(config, 3, &lower, &upper, 9).unwrap();
        for i in 0..200 {
            let s = [0.01 * i as f64, -0.5, 1.0];
            let (x, y) = (a.act(&s, true), b.act(&s, true));
            assert_eq!(x, y);
            let (r, _) = (a.random_action(), b.random_action());
            for action in [x, r, a.greedy(&s)] {
                let Action::Continuous(v) = action else {
                    panic!("continuous")
                };
                assert!(v
                    .iter()
                    .zip(lower.iter().zip(&upper))
                    .all(|(x, (l, u))| l <= x && x <= u));
            }
        }
    }

    #[test]
    fn action_normalization_round_trips() {
        let ac = ActorCritic::new(small_config(), 1, &[-0.1, 2.0], &[0.1, 4.0], 0).unwrap();
        let unit = ac.normalize_action(&[0.05, 2.5]);
        assert!((unit[0] - 0.5).abs() < 1e-12 && (unit[1] + 0.5).abs() < 1e-12);
        let back = ac.denormalize_action(&unit);
        assert!((back[0] - 0.05).abs() < 1e-12 && (back[1] - 2.5).abs() < 1e-12);
    }

    /// Two states that alternate; reward 1 when leaving state 0. The actor
    /// is frozen, so the critic must learn the policy's value.
    #[test]
    fn critic_matches_two_state_policy_value() {
        let gamma = 0.9;
        let config = AgentConfig {
            gamma,
            actor_lr: 0.0,
            critic_lr: 1e-3,
            tau: 0.05,
            policy_delay: 1,
            hidden: vec![32, 32],
            batch_size: 64,
            buffer_capacity: 1_000,
            ..AgentConfig::default()
        };
        let mut ac = ActorCritic::new(config, 1, &[-1.0], &[1.0], 11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1_000 {
            let s: usize = rng.random_range(0..2);
            let a = [rng.random_range(-1.0..=1.0)];
            let r = if s == 0 { 1.0 } else { 0.0 };
            ac.buffer
                .push(&[s as f64], &a, r, &[(1 - s) as f64], false)
                .unwrap();
        }
        for _ in 0..6_000 {
            ac.train().unwrap();
        }
        // V(0) = 1 + gamma V(1), V(1) = gamma V(0)
        let v0 = 1.0 / (1.0 - gamma * gamma);
        let v1 = gamma * v0;
        for (s, v) in [(0.0, v0), (1.0, v1)] {
            let pi = ac.greedy(&[s]);
            let q = ac.q_estimate(&[s], &pi);
            assert!((q - v).abs() < 0.05 * v, "state {s}: {q} vs {v}");
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        let a = ActorCritic::new(small_config(), 2, &[-1.0], &[1.0], 1).unwrap();
        let mut b = ActorCritic::new(small_config(), 2, &[-1.0], &[1.0], 2).unwrap();
        let mut buf = Vec::new();
        a.write_checkpoint(&mut buf).unwrap();
        let tensors = super::super::nn::read_tensors(buf.as_slice()).unwrap();
        b.load_weights(&tensors).unwrap();
        assert_eq!(params(b.actor()), params(a.actor()));
        assert_eq!(
            params(&b.critic_targets()[1]),
            params(&a.critic_targets()[1])
        );
        let mut wide = ActorCritic::new(
            AgentConfig {
                hidden: vec![4],
                ..small_config()
            },
            2,
            &[-1.0],
            &[1.0],
            0,
        )
        .unwrap();
        assert!(wide.load_weights(&tensors).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let mut ac = ActorCritic::new(small_config(), 2, &[-1.0], &[1.0], 0).unwrap();
        let err = ac.update(&batch(
            array![f64::INFINITY, 0.0, 0.0],
            array![0.0, 0.0, 0.0],
        ));
        assert!(matches!(err, Err(Error::Diverged { .. })));
    }
}
