//! Decoding model, outer-loop link adaptation and HARQ bookkeeping.

use rand::Rng;

use super::mcs::McsEntry;

/// Logistic BLER curve in dB, anchored so that the BLER at an entry's
/// threshold equals the target BLER:
///
/// `bler(x) = 1 / (1 + (1 - target) / target * exp((x - threshold) / slope))`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlerModel {
    pub target_bler: f64,
    pub slope_db: f64,
}

impl BlerModel {
    pub fn bler(&self, mcs: &McsEntry, sinr_true_db: f64) -> f64 {
        let odds = (1.0 - self.target_bler) / self.target_bler;
        let x = (sinr_true_db - mcs.sinr_threshold_db) / self.slope_db;
        let denom = 1.0 + odds * x.exp();
        if denom.is_finite() {
            1.0 / denom
        } else {
            0.0
        }
    }
}

/// Draws exactly one uniform from `rng` and acknowledges with probability
/// `1 - bler`.
pub fn decode_outcome<R: Rng + ?Sized>(
    mcs: &McsEntry,
    sinr_true_db: f64,
    model: &BlerModel,
    rng: &mut R,
) -> bool {
    let u: f64 = rng.random();
    u >= model.bler(mcs, sinr_true_db)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OllaParams {
    pub step_up_db: f64,
    pub step_down_db: f64,
    pub limit_db: f64,
}

/// Fixed-step OLLA: `+step_up` on ACK, `-step_down` on NACK, clamped to
/// `[-limit, +limit]`.
pub fn apply_olla(offset_db: f64, ack: bool, params: &OllaParams) -> f64 {
    let next = if ack {
        offset_db + params.step_up_db
    } else {
        offset_db - params.step_down_db
    };
    next.clamp(-params.limit_db, params.limit_db)
}

/// One stop-and-wait HARQ process.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HarqProcess {
    pub active: bool,
    /// Position in the MCS table of the pending transport block.
    pub mcs: usize,
    pub retx_count: u32,
    pub tb_size_bits: u64,
}

/// What happened to a transport block after feedback.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarqOutcome {
    Delivered(u64),
    Pending,
    Dropped,
}

impl HarqProcess {
    pub fn start(&mut self, mcs: usize, tb_size_bits: u64) {
        *self = HarqProcess {
            active: true,
            mcs,
            retx_count: 0,
            tb_size_bits,
        };
    }

    pub fn clear(&mut self) {
        *self = HarqProcess::default();
    }

    /// Resolves the feedback for the active transport block.
    pub fn feedback(&mut self, ack: bool, max_retx: u32) -> HarqOutcome {
        debug_assert!(self.active);
        if ack {
            let bits = self.tb_size_bits;
            self.clear();
            HarqOutcome::Delivered(bits)
        } else if self.retx_count >= max_retx {
            self.clear();
            HarqOutcome::Dropped
        } else {
            self.retx_count += 1;
            HarqOutcome::Pending
        }
    }
}
