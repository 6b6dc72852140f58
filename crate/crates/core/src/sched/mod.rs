//! Conventional scheduling: proportional fair, max C/I and round-robin,
//! the exponential throughput tracker and fairness/utility metrics.

mod metrics;
mod select;
mod tracker;

pub use metrics::{jain_index, kelly_aggregate_change, sum_log_utility, WindowedMetrics};
pub use select::{argmax, max_ci_select, pf_select, round_robin_select, SchedulerKind};
pub use tracker::ThroughputTracker;
