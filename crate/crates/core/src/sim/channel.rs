//! Rayleigh block fading with delayed SINR feedback.
//!
//! Each UE carries a complex Gaussian gain `h ~ CN(0, 1)` evolving as a
//! first-order Gauss-Markov process `h' = rho * h + sqrt(1 - rho^2) * w`.
//! The marginal power `|h|^2` is unit-mean exponential for every `rho`;
//! `rho = 0` gives i.i.d. block fading per TTI.

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSample {
    pub ue_id: usize,
    /// Linear power gain, unit-mean exponential.
    pub fading_power: f64,
    pub sinr_true_db: f64,
    /// The true SINR from `feedback_delay_ttis` TTIs earlier.
    pub sinr_reported_db: f64,
}

impl ChannelSample {
    /// Bit pattern used for mirrored-environment comparisons.
    pub fn fingerprint(&self) -> [u64; 3] {
        [
            self.fading_power.to_bits(),
            self.sinr_true_db.to_bits(),
            self.sinr_reported_db.to_bits(),
        ]
    }
}

/// Per-UE fading process and feedback pipeline.
#[derive(Debug, Clone)]
pub struct FadingState {
    gain: (f64, f64),
    correlation: f64,
    avg_snr_db: f64,
    /// True SINR history, oldest first; length `delay + 1` once primed.
    history: VecDeque<f64>,
    delay: usize,
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    (re * std::f64::consts::FRAC_1_SQRT_2, im * std::f64::consts::FRAC_1_SQRT_2)
}

pub fn power_to_db(p: f64) -> f64 {
    10.0 * p.max(f64::MIN_POSITIVE).log10()
}

impl FadingState {
    /// Draws the stationary initial gain. The feedback history is empty until
    /// [`FadingState::advance`] has been called `delay + 1` times.
    pub fn new<R: Rng + ?Sized>(
        avg_snr_db: f64,
        correlation: f64,
        delay: usize,
        rng: &mut R,
    ) -> Self {
        Self {
            gain: complex_gaussian(rng),
            correlation,
            avg_snr_db,
            history: VecDeque::with_capacity(delay + 1),
            delay,
        }
    }

    pub fn avg_snr_db(&self) -> f64 {
        self.avg_snr_db
    }

    fn power(&self) -> f64 {
        self.gain.0 * self.gain.0 + self.gain.1 * self.gain.1
    }

    /// Moves the process one TTI forward and returns the new sample.
    ///
    /// The first call after construction uses the initial gain as-is so the
    /// sequence starts from the stationary distribution.
    pub fn advance<R: Rng + ?Sized>(&mut self, ue_id: usize, rng: &mut R) -> ChannelSample {
        if !self.history.is_empty() {
            let rho = self.correlation;
            let w = complex_gaussian(rng);
            let innov = (1.0 - rho * rho).sqrt();
            self.gain = (rho * self.gain.0 + innov * w.0, rho * self.gain.1 + innov * w.1);
        }
        let fading_power = self.power().max(f64::MIN_POSITIVE);
        let sinr_true_db = self.avg_snr_db + power_to_db(fading_power);
        self.history.push_back(sinr_true_db);
        while self.history.len() > self.delay + 1 {
            self.history.pop_front();
        }
        ChannelSample {
            ue_id,
            fading_power,
            sinr_true_db,
            sinr_reported_db: self.history[0],
        }
    }

    pub fn is_primed(&self) -> bool {
        self.history.len() == self.delay + 1
    }
}
