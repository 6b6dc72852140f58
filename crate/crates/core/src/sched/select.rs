//! Single-RBG scheduling decisions. Every selector breaks ties toward the
//! lowest UE index.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{contract_err, Error, Result};

/// Proportional-fair choice `argmax_n I_n / T_n`.
pub fn pf_select(inst_rates: &[f64], avg_rates: &[f64]) -> Result<usize> {
    if inst_rates.len() != avg_rates.len() || inst_rates.is_empty() {
        return Err(contract_err(format!(
            "PF needs matching non-empty inputs, got {} rates and {} averages",
            inst_rates.len(),
            avg_rates.len()
        )));
    }
    if let Some(t) = avg_rates.iter().find(|&&t| !(t > 0.0)) {
        return Err(contract_err(format!("PF average throughput {t} is not positive")));
    }
    let mut best = 0;
    let mut best_metric = f64::NEG_INFINITY;
    for (n, (&i, &t)) in inst_rates.iter().zip(avg_rates).enumerate() {
        let metric = i / t;
        if metric > best_metric {
            best = n;
            best_metric = metric;
        }
    }
    Ok(best)
}

/// `argmax_n I_n`.
pub fn max_ci_select(inst_rates: &[f64]) -> Result<usize> {
    argmax(inst_rates).ok_or_else(|| contract_err("max C/I needs at least one UE"))
}

pub fn round_robin_select(tti: u64, n_ue: usize) -> Result<usize> {
    if n_ue == 0 {
        return Err(contract_err("round-robin needs at least one UE"));
    }
    Ok((tti % n_ue as u64) as usize)
}

/// Index of the largest value, lowest index on ties. NaNs never win.
pub fn argmax(values: &[f64]) -> Option<usize> {
    if values.is_empty() {
        return None;
    }
    let mut best = 0;
    for (n, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] || values[best].is_nan() {
            best = n;
        }
    }
    Some(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulerKind {
    Pf,
    MaxCi,
    RoundRobin,
    Agent,
}

impl SchedulerKind {
    /// Decision for the conventional schedulers. `Agent` has no closed form
    /// and is rejected.
    pub fn select(self, tti: u64, inst_rates: &[f64], avg_rates: &[f64]) -> Result<usize> {
        match self {
            SchedulerKind::Pf => pf_select(inst_rates, avg_rates),
            SchedulerKind::MaxCi => max_ci_select(inst_rates),
            SchedulerKind::RoundRobin => round_robin_select(tti, inst_rates.len()),
            SchedulerKind::Agent => Err(contract_err("agent decisions come from a policy network")),
        }
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchedulerKind::Pf => "pf",
            SchedulerKind::MaxCi => "maxci",
            SchedulerKind::RoundRobin => "rr",
            SchedulerKind::Agent => "agent",
        })
    }
}

impl FromStr for SchedulerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pf" => Ok(SchedulerKind::Pf),
            "maxci" | "max_ci" => Ok(SchedulerKind::MaxCi),
            "rr" | "round_robin" => Ok(SchedulerKind::RoundRobin),
            "agent" => Ok(SchedulerKind::Agent),
            other => Err(Error::Config(format!("unknown scheduler '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pf_examples() {
        assert_eq!(pf_select(&[10.0, 10.0, 10.0], &[1.0, 2.0, 5.0]).unwrap(), 0);
        assert_eq!(pf_select(&[2.0, 8.0], &[1.0, 1.0]).unwrap(), 1);
        assert_eq!(pf_select(&[4.0, 9.0], &[2.0, 3.0]).unwrap(), 1);
        assert_eq!(pf_select(&[28.0, 63.0], &[2.0, 3.0]).unwrap(), 1);
    }

    #[test]
    fn pf_tie_goes_to_lowest_index() {
        assert_eq!(pf_select(&[2.0, 4.0, 4.0], &[1.0, 2.0, 2.0]).unwrap(), 0);
        assert_eq!(pf_select(&[1.0, 3.0, 3.0], &[1.0, 1.0, 1.0]).unwrap(), 1);
    }

    #[test]
    fn pf_rejects_nonpositive_average() {
        assert!(pf_select(&[1.0, 2.0], &[1.0, 0.0]).is_err());
        assert!(pf_select(&[1.0, 2.0], &[1.0, -3.0]).is_err());
        assert!(pf_select(&[1.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn max_ci_examples() {
        assert_eq!(max_ci_select(&[3.0, 9.0, 9.0]).unwrap(), 1);
        assert_eq!(max_ci_select(&[5.0]).unwrap(), 0);
        assert_eq!(max_ci_select(&[7.0; 4]).unwrap(), 0);
        assert!(max_ci_select(&[]).is_err());
    }

    #[test]
    fn round_robin_examples() {
        assert_eq!(round_robin_select(0, 5).unwrap(), 0);
        assert_eq!(round_robin_select(7, 5).unwrap(), 2);
        assert_eq!(round_robin_select(5, 5).unwrap(), 0);
        assert!(round_robin_select(5, 0).is_err());
    }

    #[test]
    fn kind_round_trips_through_text() {
        for k in [SchedulerKind::Pf, SchedulerKind::MaxCi, SchedulerKind::RoundRobin] {
            assert_eq!(k.to_string().parse::<SchedulerKind>().unwrap(), k);
        }
        assert!("fifo".parse::<SchedulerKind>().is_err());
    }
}
