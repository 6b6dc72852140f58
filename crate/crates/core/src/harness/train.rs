//! Training loops for the three reward methods.
//!
//! Every loop drives `n_envs` mirrored environment pairs in lock step. One
//! round steps each pair once, funnels the resulting transitions into the
//! learner's replay buffer, then performs a single training update. An
//! environment is reset with a fresh derived seed every `episode_ttis` TTIs.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{Method, RunConfig};
use super::eval::{evaluate_vs_pf, EvalRecord, EvalSettings, GreedyActor};
use super::mirror::MirroredEnvPair;
use super::normalize::normalize_state;
use crate::agent::checkpoint::{self, network_digest};
use crate::agent::{scheduled_ue, DdpgAgent, Transition};
use crate::error::{config_err, contract_err, Error, Result};
use crate::reward::{direct_reward, dual_reward, expert_reward, ComparisonOutcome};
use crate::sched::pf_select;
use crate::sim::McsTable;

/// Everything recorded for one agent in one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub seed: u64,
    /// 0 except for the second agent of dual learning.
    pub agent: usize,
    pub evals: Vec<EvalRecord>,
    /// Mean reward of the transitions collected in the round preceding each
    /// update, indexed by update number minus one.
    pub rewards: Vec<f64>,
}

#[derive(Debug)]
pub struct TrainOutput {
    pub logs: Vec<RunLog>,
    pub agents: Vec<DdpgAgent>,
}

/// splitmix64 finalizer over a combined key.
pub fn derive_seed(base: u64, tag: u64, a: u64, b: u64) -> u64 {
    let mut z = base
        ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ a.wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
        ^ b.wrapping_mul(0x1656_67B1_9E37_79F9);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const TAG_EPISODE: u64 = 1;
const TAG_NOISE: u64 = 2;
const TAG_AGENT: u64 = 3;

struct Slot {
    pair: MirroredEnvPair,
    index: u64,
    episode: u64,
    noise_rng: ChaCha8Rng,
}

struct Rollout<'a> {
    cfg: &'a RunConfig,
    seed: u64,
    slots: Vec<Slot>,
    table: McsTable,
}

impl<'a> Rollout<'a> {
    fn new(cfg: &'a RunConfig, seed: u64) -> Result<Self> {
        let table = cfg.table()?;
        let mut slots = Vec::with_capacity(cfg.n_envs);
        for k in 0..cfg.n_envs as u64 {
            let mut pair = MirroredEnvPair::new(&cfg.sim, &table, cfg.metrics_window)?;
            pair.reset(derive_seed(seed, TAG_EPISODE, k, 0));
            slots.push(Slot {
                pair,
                index: k,
                episode: 0,
                noise_rng: ChaCha8Rng::seed_from_u64(derive_seed(seed, TAG_NOISE, k, 0)),
            });
        }
        Ok(Self { cfg, seed, slots, table })
    }

    fn roll_episodes(&mut self) {
        for slot in &mut self.slots {
            if slot.pair.agent_env.tti() >= self.cfg.episode_ttis {
                slot.episode += 1;
                slot.pair
                    .reset(derive_seed(self.seed, TAG_EPISODE, slot.index, slot.episode));
            }
        }
    }

    fn eval(&self, agent: &DdpgAgent) -> Result<EvalRecord> {
        let settings = EvalSettings {
            sim: &self.cfg.sim,
            table: &self.table,
            seeds: &self.cfg.eval_seeds,
            ttis: self.cfg.eval_ttis,
        };
        evaluate_vs_pf(&mut GreedyActor(agent.actor()), &settings, agent.update_count())
    }
}

fn new_agent(cfg: &RunConfig, seed: u64, which: u64) -> Result<DdpgAgent> {
    DdpgAgent::new(cfg.sim.n_ue, cfg.hp.clone(), derive_seed(seed, TAG_AGENT, which, 0))
}

/// Saves the agent next to the run outputs before propagating a
/// non-finite failure.
fn abort_with_checkpoint(cfg: &RunConfig, seed: u64, agent: &DdpgAgent, err: Error) -> Error {
    if matches!(err, Error::NonFinite(_)) {
        let path: PathBuf = cfg.out_dir.join(format!("abort_seed{seed}.ckpt"));
        let saved = std::fs::create_dir_all(&cfg.out_dir)
            .map_err(Error::from)
            .and_then(|_| checkpoint::save(agent, &path));
        match saved {
            Ok(()) => log::error!("non-finite training state, checkpoint written to {}", path.display()),
            Err(e) => log::error!("non-finite training state, checkpoint failed: {e}"),
        }
    }
    err
}

pub fn train(cfg: &RunConfig, seed: u64) -> Result<TrainOutput> {
    cfg.validate()?;
    match cfg.method {
        Method::Direct => run_direct(cfg, seed),
        Method::Expert => run_expert(cfg, seed),
        Method::Dual => run_dual(cfg, seed),
        Method::BaselineOnly => Err(config_err("baseline-only runs have nothing to train")),
    }
}

pub fn run_direct(cfg: &RunConfig, seed: u64) -> Result<TrainOutput> {
    run_single(cfg, seed, Method::Direct)
}

pub fn run_expert(cfg: &RunConfig, seed: u64) -> Result<TrainOutput> {
    run_single(cfg, seed, Method::Expert)
}

fn run_single(cfg: &RunConfig, seed: u64, method: Method) -> Result<TrainOutput> {
    let weights = cfg.weights();
    let mut rollout = Rollout::new(cfg, seed)?;
    let mut agent = new_agent(cfg, seed, 0)?;
    let tp_scale = rollout.slots[0].pair.agent_env.max_rate();
    let mut log = RunLog {
        seed,
        agent: 0,
        evals: vec![rollout.eval(&agent)?],
        rewards: Vec::new(),
    };

    while agent.update_count() < cfg.total_updates {
        rollout.roll_episodes();
        let mut round_reward = 0.0;
        for slot in &mut rollout.slots {
            let pair = &mut slot.pair;
            let s = normalize_state(&pair.agent_env.observation())?;
            let a = agent.select_action(&s, true, &mut slot.noise_rng)?;
            let r_obs = pair.reference_env.observation();
            let pf = pf_select(&r_obs.inst_rate, &r_obs.avg_rate)?;
            let (res_a, res_r) = pair.step(scheduled_ue(&a), pf)?;
            let mine = pair.agent_snapshot(&res_a);
            let r = match method {
                Method::Direct => direct_reward(&mine, &weights, tp_scale)?,
                _ => {
                    let theirs = pair.reference_snapshot(&res_r);
                    expert_reward(ComparisonOutcome::between(&mine, &theirs, cfg.compare_tol), &weights)
                }
            };
            round_reward += r;
            let s_next = normalize_state(&pair.agent_env.observation())?;
            agent.store(Transition { s, a, r, s_next })?;
        }
        let learned = agent
            .learn()
            .map_err(|e| abort_with_checkpoint(cfg, seed, &agent, e))?;
        if learned.is_some() {
            log.rewards.push(round_reward / cfg.n_envs as f64);
            if agent.update_count() % cfg.eval_every == 0 {
                log.evals.push(rollout.eval(&agent)?);
            }
        }
    }
    Ok(TrainOutput {
        logs: vec![log],
        agents: vec![agent],
    })
}

/// Digest of all four networks, used to assert the frozen agent is
/// untouched by its opponent's training phase.
pub fn agent_digest(agent: &DdpgAgent) -> [[u8; 32]; 4] {
    let n = agent.networks();
    [
        network_digest(&n.actor),
        network_digest(&n.critic),
        network_digest(&n.target_actor),
        network_digest(&n.target_critic),
    ]
}

/// Alternating training of two agents, each rewarded for beating the
/// other's frozen, noise-free copy on the same channels.
pub fn run_dual(cfg: &RunConfig, seed: u64) -> Result<TrainOutput> {
    let weights = cfg.weights();
    let mut rollout = Rollout::new(cfg, seed)?;
    let mut agents = vec![new_agent(cfg, seed, 0)?, new_agent(cfg, seed, 1)?];
    let mut logs: Vec<RunLog> = (0..2)
        .map(|i| {
            Ok(RunLog {
                seed,
                agent: i,
                evals: vec![rollout.eval(&agents[i])?],
                rewards: Vec::new(),
            })
        })
        .collect::<Result<_>>()?;

    let mut learner = 0usize;
    while agents.iter().any(|a| a.update_count() < cfg.total_updates) {
        if agents[learner].update_count() >= cfg.total_updates {
            learner = 1 - learner;
        }
        let (first, second) = agents.split_at_mut(1);
        let (live, frozen) = if learner == 0 {
            (&mut first[0], &second[0])
        } else {
            (&mut second[0], &first[0])
        };
        let frozen_digest = agent_digest(frozen);
        let phase_end = (live.update_count() + cfg.dual_phase_updates).min(cfg.total_updates);

        while live.update_count() < phase_end {
            rollout.roll_episodes();
            let mut round_reward = 0.0;
            for slot in &mut rollout.slots {
                let pair = &mut slot.pair;
                // agent_env is always agent 0's, reference_env agent 1's.
                let obs0 = normalize_state(&pair.agent_env.observation())?;
                let obs1 = normalize_state(&pair.reference_env.observation())?;
                let (s, s_frozen) = if learner == 0 { (obs0, obs1) } else { (obs1, obs0) };
                let a = live.select_action(&s, true, &mut slot.noise_rng)?;
                let a_frozen = frozen.actor().predict(&s_frozen)?;
                let (ue0, ue1) = if learner == 0 {
                    (scheduled_ue(&a), scheduled_ue(&a_frozen))
                } else {
                    (scheduled_ue(&a_frozen), scheduled_ue(&a))
                };
                let (res0, res1) = pair.step(ue0, ue1)?;
                let snap0 = pair.agent_snapshot(&res0);
                let snap1 = pair.reference_snapshot(&res1);
                let (mine, theirs) = if learner == 0 { (snap0, snap1) } else { (snap1, snap0) };
                let r = dual_reward(ComparisonOutcome::between(&mine, &theirs, cfg.compare_tol), &weights);
                round_reward += r;
                let next_obs = if learner == 0 {
                    pair.agent_env.observation()
                } else {
                    pair.reference_env.observation()
                };
                let s_next = normalize_state(&next_obs)?;
                live.store(Transition { s, a, r, s_next })?;
            }
            let learned = live
                .learn()
                .map_err(|e| abort_with_checkpoint(cfg, seed, live, e))?;
            if learned.is_some() {
                logs[learner].rewards.push(round_reward / cfg.n_envs as f64);
                if live.update_count() % cfg.eval_every == 0 {
                    logs[learner].evals.push(rollout.eval(live)?);
                }
            }
        }

        if agent_digest(frozen) != frozen_digest {
            return Err(contract_err(format!("agent {} changed while frozen", 1 - learner)));
        }
        learner = 1 - learner;
    }
    Ok(TrainOutput { logs, agents })
}
