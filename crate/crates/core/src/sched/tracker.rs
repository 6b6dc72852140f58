use serde::{Deserialize, Serialize};

use crate::error::{contract_err, Result};

/// Exponentially averaged per-UE throughput `T_n`:
///
/// `T_n(t) = (W - 1) / W * T_n(t - 1) + 1 / W * delivered_n(t)`
///
/// applied to every UE every TTI. Values are floored at the smallest
/// positive normal `f64` so the PF ratio is always defined, even after very
/// long starvation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputTracker {
    t_avg: Vec<f64>,
    window_w: f64,
    epsilon_init: f64,
}

impl ThroughputTracker {
    pub const DEFAULT_WINDOW: f64 = 100.0;
    pub const DEFAULT_EPSILON: f64 = 1.0;

    pub fn new(n_ue: usize, window_w: f64, epsilon_init: f64) -> Result<Self> {
        if !(window_w >= 1.0 && window_w.is_finite()) {
            return Err(contract_err(format!("averaging window {window_w} must be >= 1")));
        }
        if !(epsilon_init > 0.0 && epsilon_init.is_finite()) {
            return Err(contract_err("initial average throughput must be positive"));
        }
        Ok(Self {
            t_avg: vec![epsilon_init; n_ue],
            window_w,
            epsilon_init,
        })
    }

    /// Tracker with explicit starting averages.
    pub fn from_averages(t_avg: Vec<f64>, window_w: f64) -> Result<Self> {
        if t_avg.iter().any(|&t| !(t > 0.0)) {
            return Err(contract_err("average throughputs must be positive"));
        }
        let mut tr = Self::new(t_avg.len(), window_w, Self::DEFAULT_EPSILON)?;
        tr.t_avg = t_avg;
        Ok(tr)
    }

    pub fn reset(&mut self) {
        self.t_avg.iter_mut().for_each(|t| *t = self.epsilon_init);
    }

    pub fn averages(&self) -> &[f64] {
        &self.t_avg
    }

    pub fn window(&self) -> f64 {
        self.window_w
    }

    pub fn update(&mut self, delivered: &[f64]) -> Result<()> {
        if delivered.len() != self.t_avg.len() {
            return Err(contract_err(format!(
                "delivered has {} entries, tracker has {}",
                delivered.len(),
                self.t_avg.len()
            )));
        }
        if let Some(d) = delivered.iter().find(|&&d| !(d >= 0.0)) {
            return Err(contract_err(format!("negative delivered throughput {d}")));
        }
        let keep = (self.window_w - 1.0) / self.window_w;
        let gain = 1.0 / self.window_w;
        for (t, &d) in self.t_avg.iter_mut().zip(delivered) {
            *t = (keep * *t + gain * d).max(f64::MIN_POSITIVE);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_update_arithmetic() {
        let mut tr = ThroughputTracker::from_averages(vec![5.0], 10.0).unwrap();
        tr.update(&[15.0]).unwrap();
        assert!((tr.averages()[0] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_point() {
        let mut tr = ThroughputTracker::from_averages(vec![3.25, 8.0], 100.0).unwrap();
        tr.update(&[3.25, 8.0]).unwrap();
        assert!((tr.averages()[0] - 3.25).abs() < 1e-12);
        assert!((tr.averages()[1] - 8.0).abs() < 1e-12);
    }

    #[test]
    fn unscheduled_decays_by_keep_factor() {
        let mut tr = ThroughputTracker::from_averages(vec![200.0, 50.0], 100.0).unwrap();
        tr.update(&[0.0, 300.0]).unwrap();
        assert!((tr.averages()[0] - 198.0).abs() < 1e-12);
    }

    #[test]
    fn geometric_convergence_within_ten_windows() {
        // |T - c| shrinks by (1 - 1/W)^k; after 10 W steps it is e^-10 of
        // the initial gap, well under 1%.
        let c = 4200.0;
        for start in [1.0, 1e5] {
            let mut tr = ThroughputTracker::from_averages(vec![start], 50.0).unwrap();
            for _ in 0..500 {
                tr.update(&[c]).unwrap();
            }
            let gap0: f64 = (start - c).abs();
            let bound = gap0 * (1.0f64 - 1.0 / 50.0).powi(500);
            let gap = (tr.averages()[0] - c).abs();
            assert!(gap <= bound * (1.0 + 1e-9) + 1e-9);
            assert!(gap / c < 0.01);
        }
    }

    #[test]
    fn never_reaches_zero() {
        let mut tr = ThroughputTracker::new(1, 2.0, 1.0).unwrap();
        for _ in 0..5000 {
            tr.update(&[0.0]).unwrap();
        }
        assert!(tr.averages()[0] > 0.0);
    }

    #[test]
    fn rejects_negative_and_mismatch() {
        let mut tr = ThroughputTracker::new(2, 100.0, 1.0).unwrap();
        assert!(tr.update(&[1.0, -1.0]).is_err());
        assert!(tr.update(&[1.0]).is_err());
        assert!(tr.update(&[f64::NAN, 0.0]).is_err());
        assert!(ThroughputTracker::new(2, 0.5, 1.0).is_err());
        assert!(ThroughputTracker::new(2, 10.0, 0.0).is_err());
    }
}
