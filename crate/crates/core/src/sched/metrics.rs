//! Fairness and utility metrics, plus the moving-window throughput view used
//! for rewards and evaluation.

use std::collections::VecDeque;

use crate::error::{contract_err, Result};
use crate::sim::TtiResult;

/// Jain's fairness index `(sum v)^2 / (N * sum v^2)`.
///
/// All-zero input is undefined; it returns 1.0 by convention and logs a
/// warning.
pub fn jain_index(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return Err(contract_err("Jain index of an empty set"));
    }
    if let Some(x) = v.iter().find(|&&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(contract_err(format!("Jain index input {x} is not a finite non-negative value")));
    }
    let j = jain_unchecked(v);
    if v.iter().all(|&x| x == 0.0) {
        log::warn!("Jain index of an all-zero vector; returning 1.0");
    }
    Ok(j)
}

fn jain_unchecked(v: &[f64]) -> f64 {
    let sum: f64 = v.iter().sum();
    let sum_sq: f64 = v.iter().map(|x| x * x).sum();
    if sum_sq == 0.0 {
        return 1.0;
    }
    // Rounding can push the ratio a hair outside [1/N, 1].
    let n = v.len() as f64;
    (sum * sum / (n * sum_sq)).clamp(1.0 / n, 1.0)
}

/// `sum_n ln(rates[n])`, the proportional-fairness utility.
pub fn sum_log_utility(rates: &[f64]) -> Result<f64> {
    if let Some(r) = rates.iter().find(|&&r| !(r > 0.0)) {
        return Err(contract_err(format!("log utility of non-positive rate {r}")));
    }
    Ok(rates.iter().map(|r| r.ln()).sum())
}

/// Aggregate proportional change `sum_n (x*_n - x_n) / x_n`. Non-positive
/// for every feasible `x*` exactly when `x` is proportionally fair.
pub fn kelly_aggregate_change(x: &[f64], x_star: &[f64]) -> Result<f64> {
    if x.len() != x_star.len() {
        return Err(contract_err("rate vectors differ in length"));
    }
    if let Some(v) = x.iter().find(|&&v| !(v > 0.0)) {
        return Err(contract_err(format!("reference rate {v} is not positive")));
    }
    Ok(x.iter().zip(x_star).map(|(&a, &b)| (b - a) / a).sum())
}

/// Delivered bits over the last `window_len` TTIs.
///
/// Sums are kept in integer bits so eviction is exact regardless of run
/// length.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedMetrics {
    window_len: usize,
    ring: VecDeque<(usize, u64)>,
    sums: Vec<u64>,
    v_avg: Vec<f64>,
    throughput_sum: f64,
    jfi: f64,
}

impl WindowedMetrics {
    pub const DEFAULT_WINDOW: usize = 200;

    pub fn new(n_ue: usize, window_len: usize) -> Result<Self> {
        if window_len == 0 || n_ue == 0 {
            return Err(contract_err("window and UE count must be positive"));
        }
        Ok(Self {
            window_len,
            ring: VecDeque::with_capacity(window_len),
            sums: vec![0; n_ue],
            v_avg: vec![0.0; n_ue],
            throughput_sum: 0.0,
            jfi: 1.0,
        })
    }

    pub fn update(&mut self, result: &TtiResult) -> Result<()> {
        self.push(result.scheduled_ue, result.delivered_bits)
    }

    /// Records one TTI in which `ue` received `bits` and everyone else 0.
    pub fn push(&mut self, ue: usize, bits: u64) -> Result<()> {
        if ue >= self.sums.len() {
            return Err(contract_err(format!("UE {ue} out of range")));
        }
        if self.ring.len() == self.window_len {
            let (old_ue, old_bits) = self.ring.pop_front().expect("non-empty ring");
            self.sums[old_ue] -= old_bits;
        }
        self.ring.push_back((ue, bits));
        self.sums[ue] += bits;
        self.recompute();
        Ok(())
    }

    fn recompute(&mut self) {
        let len = self.ring.len().max(1) as f64;
        for (v, &s) in self.v_avg.iter_mut().zip(&self.sums) {
            *v = s as f64 / len;
        }
        self.throughput_sum = self.v_avg.iter().sum();
        self.jfi = jain_unchecked(&self.v_avg);
    }

    pub fn clear(&mut self) {
        self.ring.clear();
        self.sums.iter_mut().for_each(|s| *s = 0);
        self.recompute();
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    /// Number of TTIs currently in the window.
    pub fn filled(&self) -> usize {
        self.ring.len()
    }

    /// Per-UE average delivered bits per TTI over the window.
    pub fn v_avg(&self) -> &[f64] {
        &self.v_avg
    }

    pub fn throughput_sum(&self) -> f64 {
        self.throughput_sum
    }

    pub fn jfi(&self) -> f64 {
        self.jfi
    }
}
