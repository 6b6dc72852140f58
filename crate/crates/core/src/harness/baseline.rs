use crate::error::Result;
use crate::sched::{jain_index, SchedulerKind};
use crate::sim::{CellEnv, McsTable, SimConfig};

/// Long-run statistics of a conventional scheduler on one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineReport {
    pub scheduler: SchedulerKind,
    pub seed: u64,
    pub ttis: u64,
    /// Mean delivered bits per TTI, cell-wide.
    pub throughput: f64,
    /// Fairness of the per-UE mean delivered bits.
    pub jfi: f64,
    /// Fraction of TTIs each UE was scheduled.
    pub share: Vec<f64>,
    /// Fraction of transmissions that were NACKed.
    pub bler: f64,
}

pub fn run_baseline(
    sim: &SimConfig,
    table: &McsTable,
    scheduler: SchedulerKind,
    seed: u64,
    ttis: u64,
) -> Result<BaselineReport> {
    let mut env = CellEnv::new(sim.clone(), table.clone())?;
    env.reset(seed);
    let n = sim.n_ue;
    let mut bits = vec![0u64; n];
    let mut picks = vec![0u64; n];
    let mut nacks = 0u64;
    for _ in 0..ttis {
        let obs = env.observation();
        let ue = scheduler.select(obs.tti, &obs.inst_rate, &obs.avg_rate)?;
        let (res, _) = env.step(ue)?;
        bits[ue] += res.delivered_bits;
        picks[ue] += 1;
        nacks += u64::from(!res.ack);
    }
    let t = ttis.max(1) as f64;
    let per_ue: Vec<f64> = bits.iter().map(|&b| b as f64 / t).collect();
    Ok(BaselineReport {
        scheduler,
        seed,
        ttis,
        throughput: per_ue.iter().sum(),
        jfi: jain_index(&per_ue)?,
        share: picks.iter().map(|&p| p as f64 / t).collect(),
        bler: nacks as f64 / t,
    })
}
