//! Single-cell downlink scheduling simulator.
//!
//! The crate is split along the lines of the simulation stack:
//!
//! - [`sim`]: TTI-level environment with fading, delayed CQI-style feedback,
//!   AMC, outer-loop link adaptation and a simplified HARQ.
//! - [`sched`]: conventional schedulers (proportional fair, max C/I,
//!   round-robin), the exponential throughput tracker and fairness metrics.
//! - [`agent`]: a dependency-free DDPG implementation (MLPs with hand-written
//!   backpropagation, Adam, replay buffer, soft target networks).
//! - [`reward`]: the direct, dual and expert reward schemes.
//! - [`harness`]: mirrored environments, training loops, evaluation against
//!   proportional fair, and result emission.

pub mod agent;
pub mod error;
pub mod harness;
pub mod reward;
pub mod sched;
pub mod sim;

pub use error::{Error, Result};
