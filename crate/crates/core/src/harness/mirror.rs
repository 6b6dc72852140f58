use crate::error::{contract_err, Result};
use crate::reward::RewardSnapshot;
use crate::sched::WindowedMetrics;
use crate::sim::{CellEnv, McsTable, SimConfig, TtiResult};

/// Two environments reset with the same episode seed, one driven by the
/// policy under training and one by a reference policy. Each keeps its own
/// moving-window metrics.
#[derive(Debug, Clone)]
pub struct MirroredEnvPair {
    pub agent_env: CellEnv,
    pub reference_env: CellEnv,
    pub agent_window: WindowedMetrics,
    pub reference_window: WindowedMetrics,
}

impl MirroredEnvPair {
    pub fn new(sim: &SimConfig, table: &McsTable, window_len: usize) -> Result<Self> {
        let agent_env = CellEnv::new(sim.clone(), table.clone())?;
        let reference_env = agent_env.clone();
        let agent_window = WindowedMetrics::new(sim.n_ue, window_len)?;
        Ok(Self {
            reference_window: agent_window.clone(),
            agent_window,
            agent_env,
            reference_env,
        })
    }

    pub fn reset(&mut self, episode_seed: u64) {
        self.agent_env.reset(episode_seed);
        self.reference_env.reset(episode_seed);
        self.agent_window.clear();
        self.reference_window.clear();
    }

    /// Errors unless both environments currently hold bit-identical
    /// channel samples.
    pub fn check_mirrored(&self) -> Result<()> {
        let same = self
            .agent_env
            .channels()
            .zip(self.reference_env.channels())
            .all(|(a, b)| a.fingerprint() == b.fingerprint());
        if !same || self.agent_env.tti() != self.reference_env.tti() {
            return Err(contract_err(format!(
                "mirrored environments diverged at TTI {}",
                self.agent_env.tti()
            )));
        }
        Ok(())
    }

    /// Steps both environments on the same channel realization.
    pub fn step(&mut self, agent_ue: usize, reference_ue: usize) -> Result<(TtiResult, TtiResult)> {
        self.check_mirrored()?;
        let (a, _) = self.agent_env.step(agent_ue)?;
        let (r, _) = self.reference_env.step(reference_ue)?;
        self.agent_window.update(&a)?;
        self.reference_window.update(&r)?;
        Ok((a, r))
    }

    pub fn agent_snapshot(&self, result: &TtiResult) -> RewardSnapshot {
        RewardSnapshot::from_window(result.delivered_bits as f64, &self.agent_window)
    }

    pub fn reference_snapshot(&self, result: &TtiResult) -> RewardSnapshot {
        RewardSnapshot::from_window(result.delivered_bits as f64, &self.reference_window)
    }
}
