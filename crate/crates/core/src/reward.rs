//! Reward schemes: a weighted direct reward and two comparative lookup
//! tables, one against a second agent and one against a PF reference.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{config_err, contract_err, Result};
use crate::sched::WindowedMetrics;

/// Default relative band inside which two metrics count as equal.
pub const DEFAULT_COMPARE_TOL: f64 = 0.01;
/// Floor for the equality band so that two near-zero metrics compare equal.
pub const EPS_ABS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardWeights {
    /// Throughput weight.
    pub alpha: f64,
    /// Fairness weight.
    pub beta: f64,
}

impl RewardWeights {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let w = Self { alpha, beta };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.beta.is_finite()) || self.alpha < 0.0 || self.beta < 0.0 {
            return Err(config_err("reward weights must be finite and non-negative"));
        }
        if self.alpha == 0.0 && self.beta == 0.0 {
            return Err(config_err("reward weights cannot both be zero"));
        }
        Ok(())
    }
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self { alpha: 0.9, beta: 1.15 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparison {
    Greater,
    Equal,
    Less,
}

impl Comparison {
    pub fn reversed(self) -> Self {
        match self {
            Comparison::Greater => Comparison::Less,
            Comparison::Equal => Comparison::Equal,
            Comparison::Less => Comparison::Greater,
        }
    }
}

/// Outcome of comparing one run's windowed metrics with another's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ComparisonOutcome {
    pub throughput: Comparison,
    pub jfi: Comparison,
}

impl ComparisonOutcome {
    pub fn between(mine: &RewardSnapshot, theirs: &RewardSnapshot, rel_tol: f64) -> Self {
        Self {
            throughput: compare_metrics(mine.window_throughput, theirs.window_throughput, rel_tol),
            jfi: compare_metrics(mine.jfi, theirs.jfi, rel_tol),
        }
    }
}

/// What a reward is computed from at one TTI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardSnapshot {
    /// Bits delivered this TTI.
    pub inst_throughput: f64,
    /// Sum of per-UE windowed averages, bits/TTI.
    pub window_throughput: f64,
    pub jfi: f64,
}

impl RewardSnapshot {
    pub fn from_window(inst_throughput: f64, window: &WindowedMetrics) -> Self {
        Self {
            inst_throughput,
            window_throughput: window.throughput_sum(),
            jfi: window.jfi(),
        }
    }
}

/// `EQUAL` when `|mine - theirs| <= rel_tol * max(|mine|, |theirs|, EPS_ABS)`,
/// otherwise the sign of the difference.
pub fn compare_metrics(mine: f64, theirs: f64, rel_tol: f64) -> Comparison {
    let band = rel_tol * mine.abs().max(theirs.abs()).max(EPS_ABS);
    if (mine - theirs).abs() <= band {
        return Comparison::Equal;
    }
    match mine.partial_cmp(&theirs) {
        Some(Ordering::Greater) => Comparison::Greater,
        Some(Ordering::Less) => Comparison::Less,
        _ => Comparison::Equal,
    }
}

/// `alpha * inst / tp_scale + beta * jfi`.
pub fn direct_reward(snap: &RewardSnapshot, w: &RewardWeights, tp_scale: f64) -> Result<f64> {
    if !(tp_scale > 0.0 && tp_scale.is_finite()) {
        return Err(contract_err(format!("throughput scale {tp_scale} must be positive")));
    }
    Ok(w.alpha * (snap.inst_throughput / tp_scale) + w.beta * snap.jfi)
}

/// Two-agent table: a metric earns its weight only when strictly better;
/// equal counts as not better.
pub fn dual_reward(outcome: ComparisonOutcome, w: &RewardWeights) -> f64 {
    let tp = if outcome.throughput == Comparison::Greater { w.alpha } else { 0.0 };
    let jfi = if outcome.jfi == Comparison::Greater { w.beta } else { 0.0 };
    tp + jfi
}

/// PF-reference table: full weight when better, half when equal.
pub fn expert_reward(outcome: ComparisonOutcome, w: &RewardWeights) -> f64 {
    use Comparison::*;
    let (a, b) = (w.alpha, w.beta);
    match (outcome.throughput, outcome.jfi) {
        (Greater, Greater) => a + b,
        (Greater, Less) => a,
        (Less, Greater) => b,
        (Less, Less) => 0.0,
        (Greater, Equal) => a + 0.5 * b,
        (Equal, Greater) => 0.5 * a + b,
        (Equal, Equal) => 0.5 * (a + b),
        (Equal, Less) => 0.5 * a,
        (Less, Equal) => 0.5 * b,
    }
}
