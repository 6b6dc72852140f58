//! Greedy evaluation of a policy against PF on mirrored channels.

use super::mirror::MirroredEnvPair;
use super::normalize::normalize_state;
use crate::agent::{scheduled_ue, Mlp};
use crate::error::{contract_err, Error, Result};
use crate::sched::{pf_select, SchedulerKind};
use crate::sim::{McsTable, SimConfig, TtiObservation};

/// Anything that picks a UE from an observation.
pub trait Policy {
    fn choose(&mut self, obs: &TtiObservation) -> Result<usize>;
}

/// A conventional scheduler.
#[derive(Debug, Clone, Copy)]
pub struct Conventional(pub SchedulerKind);

impl Policy for Conventional {
    fn choose(&mut self, obs: &TtiObservation) -> Result<usize> {
        self.0.select(obs.tti, &obs.inst_rate, &obs.avg_rate)
    }
}

/// Noise-free actor: largest metric wins.
#[derive(Debug, Clone, Copy)]
pub struct GreedyActor<'a>(pub &'a Mlp);

impl Policy for GreedyActor<'_> {
    fn choose(&mut self, obs: &TtiObservation) -> Result<usize> {
        let a = self.0.predict(&normalize_state(obs)?)?;
        Ok(scheduled_ue(&a))
    }
}

/// Adapts a closure.
pub struct FnPolicy<F>(pub F);

impl<F: FnMut(&TtiObservation) -> Result<usize>> Policy for FnPolicy<F> {
    fn choose(&mut self, obs: &TtiObservation) -> Result<usize> {
        (self.0)(obs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedEval {
    pub seed: u64,
    pub agent_throughput: f64,
    pub pf_throughput: f64,
    pub agent_jfi: f64,
    pub pf_jfi: f64,
}

impl SeedEval {
    pub fn tp_diff(&self) -> f64 {
        (self.agent_throughput - self.pf_throughput) / self.pf_throughput
    }

    pub fn jfi_diff(&self) -> f64 {
        (self.agent_jfi - self.pf_jfi) / self.pf_jfi
    }
}

/// Normalized differences to PF; positive means the policy is better.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub update_count: u64,
    /// Pooled over seeds: `(sum agent - sum pf) / sum pf`.
    pub tp_diff: f64,
    /// Relative difference of the seed-averaged fairness indices.
    pub jfi_diff: f64,
    pub per_seed: Vec<SeedEval>,
}

#[derive(Debug, Clone)]
pub struct EvalSettings<'a> {
    pub sim: &'a SimConfig,
    pub table: &'a McsTable,
    pub seeds: &'a [u64],
    pub ttis: u64,
}

/// Runs the policy and PF side by side for `ttis` TTIs on each seed and
/// compares throughput and fairness over the whole run.
pub fn evaluate_vs_pf<P: Policy + ?Sized>(
    policy: &mut P,
    settings: &EvalSettings<'_>,
    update_count: u64,
) -> Result<EvalRecord> {
    if settings.seeds.is_empty() || settings.ttis == 0 {
        return Err(contract_err("evaluation needs at least one seed and one TTI"));
    }
    let window = usize::try_from(settings.ttis).map_err(|_| contract_err("eval window too long"))?;
    let mut pair = MirroredEnvPair::new(settings.sim, settings.table, window)?;
    let mut per_seed = Vec::with_capacity(settings.seeds.len());
    for &seed in settings.seeds {
        pair.reset(seed);
        for _ in 0..settings.ttis {
            let ue = policy.choose(&pair.agent_env.observation())?;
            let r = pair.reference_env.observation();
            let pf = pf_select(&r.inst_rate, &r.avg_rate)?;
            pair.step(ue, pf)?;
        }
        per_seed.push(SeedEval {
            seed,
            agent_throughput: pair.agent_window.throughput_sum(),
            pf_throughput: pair.reference_window.throughput_sum(),
            agent_jfi: pair.agent_window.jfi(),
            pf_jfi: pair.reference_window.jfi(),
        });
    }
    let n = per_seed.len() as f64;
    let sum = |f: fn(&SeedEval) -> f64| per_seed.iter().map(f).sum::<f64>();
    let pf_tp = sum(|e| e.pf_throughput);
    if !(pf_tp > 0.0) {
        return Err(contract_err("PF delivered nothing during evaluation"));
    }
    let tp_diff = (sum(|e| e.agent_throughput) - pf_tp) / pf_tp;
    let pf_jfi = sum(|e| e.pf_jfi) / n;
    let jfi_diff = (sum(|e| e.agent_jfi) / n - pf_jfi) / pf_jfi;
    if !(tp_diff.is_finite() && jfi_diff.is_finite()) {
        return Err(Error::NonFinite("evaluation differences".into()));
    }
    Ok(EvalRecord {
        update_count,
        tp_diff,
        jfi_diff,
        per_seed,
    })
}
