//! Deep deterministic policy gradient over a softmax action.
//!
//! The actor maps a normalized state to a point on the simplex (one metric
//! per UE); the UE with the largest metric is scheduled. The critic scores
//! `(state, action)` pairs with the action concatenated to the state at the
//! input layer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::mlp::{soft_update, softmax, Mlp, OutputActivation};
use super::replay::{ReplayBuffer, Transition};
use crate::error::{config_err, contract_err, Error, Result};
use crate::sched::argmax;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub gamma: f64,
    pub tau: f64,
    pub batch_size: usize,
    /// Standard deviation of the logit noise at the start of training.
    pub noise_scale: f64,
    /// Multiplicative noise decay per update.
    pub noise_decay: f64,
    /// Hidden layer widths, shared by actor and critic.
    pub hidden: Vec<usize>,
    pub buffer_capacity: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            gamma: 0.95,
            tau: 0.005,
            batch_size: 64,
            noise_scale: 0.1,
            noise_decay: 0.999,
            hidden: vec![64, 64],
            buffer_capacity: 100_000,
        }
    }
}

impl Hyperparams {
    /// Two hidden layers of 320 units.
    pub fn full_size() -> Self {
        Self {
            hidden: vec![320, 320],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(config_err("tau must lie in (0, 1]"));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(config_err("gamma must lie in [0, 1)"));
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0) {
            return Err(config_err("learning rates must be positive"));
        }
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return Err(config_err("batch_size must be positive and fit in the buffer"));
        }
        if !(self.noise_scale >= 0.0) || !(self.noise_decay > 0.0 && self.noise_decay <= 1.0) {
            return Err(config_err("noise_scale must be >= 0 and noise_decay in (0, 1]"));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(config_err("hidden layer widths must be non-empty and positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainStats {
    /// Mean squared TD error before the critic step.
    pub critic_loss: f64,
    /// Mean critic value of the actor's actions before the actor step.
    pub actor_objective: f64,
}

/// The four networks and their optimizers.
#[derive(Debug, Clone)]
pub struct Networks {
    pub actor: Mlp,
    pub critic: Mlp,
    pub target_actor: Mlp,
    pub target_critic: Mlp,
    actor_opt: Adam,
    critic_opt: Adam,
}

#[derive(Debug, Clone)]
pub struct DdpgAgent {
    nets: Networks,
    buffer: ReplayBuffer,
    hp: Hyperparams,
    n_ue: usize,
    update_count: u64,
    noise_scale: f64,
}

fn critic_input(s: &[f64], a: &[f64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(s.len() + a.len());
    x.extend_from_slice(s);
    x.extend_from_slice(a);
    x
}

/// Stream ids carved out of an agent seed.
const INIT_STREAM: u64 = 10;
const REPLAY_STREAM: u64 = 11;

impl DdpgAgent {
    pub fn new(n_ue: usize, hp: Hyperparams, seed: u64) -> Result<Self> {
        hp.validate()?;
        if n_ue < 2 {
            return Err(config_err("an agent needs at least 2 UEs"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(INIT_STREAM);
        let mut actor_sizes = vec![2 * n_ue];
        actor_sizes.extend(&hp.hidden);
        actor_sizes.push(n_ue);
        let mut critic_sizes = vec![3 * n_ue];
        critic_sizes.extend(&hp.hidden);
        critic_sizes.push(1);
        let actor = Mlp::new(&actor_sizes, OutputActivation::Softmax, &mut rng)?;
        let critic = Mlp::new(&critic_sizes, OutputActivation::Identity, &mut rng)?;
        let mut replay_seed = ChaCha8Rng::seed_from_u64(seed);
        replay_seed.set_stream(REPLAY_STREAM);
        let buffer = ReplayBuffer::new(hp.buffer_capacity, replay_seed.random())?;
        Ok(Self {
            nets: Networks {
                actor_opt: Adam::new(actor.n_params(), hp.actor_lr),
                critic_opt: Adam::new(critic.n_params(), hp.critic_lr),
                target_actor: actor.clone(),
                target_critic: critic.clone(),
                actor,
                critic,
            },
            buffer,
            noise_scale: hp.noise_scale,
            hp,
            n_ue,
            update_count: 0,
        })
    }

    /// Rebuilds an agent around restored networks. Optimizer moments and
    /// replay contents start empty.
    pub fn from_networks(
        actor: Mlp,
        critic: Mlp,
        target_actor: Mlp,
        target_critic: Mlp,
        hp: Hyperparams,
        update_count: u64,
        noise_scale: f64,
        seed: u64,
    ) -> Result<Self> {
        hp.validate()?;
        let n_ue = actor.output_size();
        if actor.input_size() != 2 * n_ue
            || critic.input_size() != 3 * n_ue
            || critic.output_size() != 1
            || actor.output_activation() != OutputActivation::Softmax
            || target_actor.layer_sizes() != actor.layer_sizes()
            || target_critic.layer_sizes() != critic.layer_sizes()
        {
            return Err(Error::Checkpoint("network shapes are inconsistent".into()));
        }
        let mut replay_seed = ChaCha8Rng::seed_from_u64(seed);
        replay_seed.set_stream(REPLAY_STREAM);
        Ok(Self {
            nets: Networks {
                actor_opt: Adam::new(actor.n_params(), hp.actor_lr),
                critic_opt: Adam::new(critic.n_params(), hp.critic_lr),
                actor,
                critic,
                target_actor,
                target_critic,
            },
            buffer: ReplayBuffer::new(hp.buffer_capacity, replay_seed.random())?,
            hp,
            n_ue,
            update_count,
            noise_scale,
        })
    }

    pub fn n_ue(&self) -> usize {
        self.n_ue
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hp
    }

    pub fn update_count(&self) -> u64 {
        self.update_count
    }

    /// Current exploration noise standard deviation.
    pub fn noise_scale(&self) -> f64 {
        self.noise_scale
    }

    pub fn actor(&self) -> &Mlp {
        &self.nets.actor
    }

    pub fn critic(&self) -> &Mlp {
        &self.nets.critic
    }

    pub fn networks(&self) -> &Networks {
        &self.nets
    }

    /// Direct access for single-step experiments; does not touch
    /// `update_count` or the noise schedule.
    pub fn networks_mut(&mut self) -> &mut Networks {
        &mut self.nets
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    /// Actor output, optionally perturbed by Gaussian noise on the logits
    /// and renormalized. Always a point on the simplex.
    pub fn select_action<R: Rng + ?Sized>(&self, s: &[f64], explore: bool, rng: &mut R) -> Result<Vec<f64>> {
        act(&self.nets.actor, s, if explore { self.noise_scale } else { 0.0 }, rng)
    }

    pub fn store(&mut self, t: Transition) -> Result<()> {
        if t.s.len() != 2 * self.n_ue || t.a.len() != self.n_ue {
            return Err(contract_err("transition does not match the agent's dimensions"));
        }
        self.buffer.store(t)
    }

    /// Samples a batch and trains on it; `None` until the buffer holds a
    /// full batch.
    pub fn learn(&mut self) -> Result<Option<TrainStats>> {
        let Some(batch) = self.buffer.sample(self.hp.batch_size) else {
            return Ok(None);
        };
        let stats = self.nets.train_step(&self.hp, &batch)?;
        self.update_count += 1;
        self.noise_scale *= self.hp.noise_decay;
        Ok(Some(stats))
    }

    /// One DDPG update on an explicit batch.
    pub fn train_step(&mut self, batch: &[&Transition]) -> Result<TrainStats> {
        let stats = self.nets.train_step(&self.hp, batch)?;
        self.update_count += 1;
        self.noise_scale *= self.hp.noise_decay;
        Ok(stats)
    }
}

/// Greedy or noisy action from an actor network.
pub fn act<R: Rng + ?Sized>(actor: &Mlp, s: &[f64], noise_scale: f64, rng: &mut R) -> Result<Vec<f64>> {
    let cache = actor.forward(s)?;
    if noise_scale <= 0.0 {
        return Ok(cache.output);
    }
    let noisy: Vec<f64> = cache
        .logits
        .iter()
        .map(|&z| z + noise_scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(softmax(&noisy))
}

/// Scheduled UE for an action vector: the largest metric, lowest index on
/// ties.
pub fn scheduled_ue(action: &[f64]) -> usize {
    argmax(action).unwrap_or(0)
}

impl Networks {
    fn check_finite(&self) -> Result<()> {
        for (name, net) in [
            ("actor", &self.actor),
            ("critic", &self.critic),
            ("target actor", &self.target_actor),
            ("target critic", &self.target_critic),
        ] {
            if !net.is_finite() {
                return Err(Error::NonFinite(format!("{name} parameters")));
            }
        }
        Ok(())
    }

    /// One critic regression step toward `r + gamma * Q'(s', mu'(s'))`.
    /// Returns the mean squared TD error before the step.
    pub fn critic_step(&mut self, hp: &Hyperparams, batch: &[&Transition]) -> Result<f64> {
        if batch.is_empty() {
            return Err(contract_err("empty training batch"));
        }
        let scale = 1.0 / batch.len() as f64;
        let mut grad = vec![0.0; self.critic.n_params()];
        let mut loss = 0.0;
        for t in batch {
            let y = if hp.gamma == 0.0 {
                t.r
            } else {
                let a_next = self.target_actor.predict(&t.s_next)?;
                let q_next = self.target_critic.predict(&critic_input(&t.s_next, &a_next))?[0];
                t.r + hp.gamma * q_next
            };
            let cache = self.critic.forward(&critic_input(&t.s, &t.a))?;
            let err = cache.output[0] - y;
            loss += err * err * scale;
            self.critic.backward(&cache, &[2.0 * err * scale], Some(&mut grad))?;
        }
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!("critic loss {loss}")));
        }
        self.critic_opt.step(self.critic.params_mut(), &grad);
        Ok(loss)
    }

    /// One actor ascent step on the mean of `Q(s, mu(s))`, chaining the
    /// critic's gradient with respect to its action input through the
    /// actor. The critic is left untouched. Returns the objective before
    /// the step.
    pub fn actor_step(&mut self, batch: &[&Transition]) -> Result<f64> {
        if batch.is_empty() {
            return Err(contract_err("empty training batch"));
        }
        let scale = 1.0 / batch.len() as f64;
        let n_state = self.actor.input_size();
        let mut grad = vec![0.0; self.actor.n_params()];
        let mut objective = 0.0;
        for t in batch {
            let a_cache = self.actor.forward(&t.s)?;
            let c_cache = self.critic.forward(&critic_input(&t.s, &a_cache.output))?;
            objective += c_cache.output[0] * scale;
            let dq_dx = self.critic.backward(&c_cache, &[1.0], None)?;
            let dy: Vec<f64> = dq_dx[n_state..].iter().map(|g| -g * scale).collect();
            self.actor.backward(&a_cache, &dy, Some(&mut grad))?;
        }
        if !objective.is_finite() {
            return Err(Error::NonFinite(format!("actor objective {objective}")));
        }
        self.actor_opt.step(self.actor.params_mut(), &grad);
        Ok(objective)
    }

    /// Critic step, actor step, then soft updates of both targets.
    pub fn train_step(&mut self, hp: &Hyperparams, batch: &[&Transition]) -> Result<TrainStats> {
        let critic_loss = self.critic_step(hp, batch)?;
        let actor_objective = self.actor_step(batch)?;
        soft_update(&self.critic, &mut self.target_critic, hp.tau)?;
        soft_update(&self.actor, &mut self.target_actor, hp.tau)?;
        self.check_finite()?;
        Ok(TrainStats {
            critic_loss,
            actor_objective,
        })
    }
}
