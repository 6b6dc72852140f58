use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{contract_err, Result};

/// Experience quadruple `(s, a, r, s')`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub s: Vec<f64>,
    /// Point on the probability simplex.
    pub a: Vec<f64>,
    pub r: f64,
    pub s_next: Vec<f64>,
}

pub const SIMPLEX_TOL: f64 = 1e-6;

pub fn is_on_simplex(a: &[f64]) -> bool {
    !a.is_empty()
        && a.iter().all(|&p| p >= 0.0 && p.is_finite())
        && (a.iter().sum::<f64>() - 1.0).abs() <= SIMPLEX_TOL
}

impl Transition {
    pub fn validate(&self) -> Result<()> {
        if !is_on_simplex(&self.a) {
            return Err(contract_err("action is not on the probability simplex"));
        }
        if !self.r.is_finite() {
            return Err(contract_err("reward is not finite"));
        }
        if self.s.len() != self.s_next.len() || self.s.iter().chain(&self.s_next).any(|v| !v.is_finite()) {
            return Err(contract_err("states must be finite and equally sized"));
        }
        Ok(())
    }
}

/// Fixed-capacity ring of transitions with uniform sampling (with
/// replacement). The oldest entry is evicted first.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    entries: Vec<Transition>,
    next: usize,
    rng: ChaCha8Rng,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, seed: u64) -> Result<Self> {
        if capacity == 0 {
            return Err(contract_err("replay capacity must be positive"));
        }
        Ok(Self {
            capacity,
            entries: Vec::with_capacity(capacity.min(1 << 16)),
            next: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn store(&mut self, t: Transition) -> Result<()> {
        t.validate()?;
        if self.entries.len() < self.capacity {
            self.entries.push(t);
        } else {
            self.entries[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn is_ready(&self, batch_size: usize) -> bool {
        batch_size > 0 && self.entries.len() >= batch_size
    }

    /// Storage positions of a uniform sample; `None` while fewer than
    /// `batch_size` transitions are held.
    pub fn sample_indices(&mut self, batch_size: usize) -> Option<Vec<usize>> {
        if !self.is_ready(batch_size) {
            return None;
        }
        let len = self.entries.len();
        Some((0..batch_size).map(|_| self.rng.random_range(0..len)).collect())
    }

    pub fn sample(&mut self, batch_size: usize) -> Option<Vec<&Transition>> {
        let idx = self.sample_indices(batch_size)?;
        Some(idx.into_iter().map(|i| &self.entries[i]).collect())
    }

    /// Transitions in storage order (not insertion order once wrapped).
    pub fn entries(&self) -> &[Transition] {
        &self.entries
    }
}
