//! Training orchestration, evaluation against PF, configuration and
//! result emission.

pub mod baseline;
pub mod config;
pub mod emit;
pub mod eval;
pub mod mirror;
pub mod normalize;
pub mod train;

pub use baseline::{run_baseline, BaselineReport};
pub use config::{Method, RunConfig};
pub use emit::{emit_results, plot_svg, read_csv, rows, write_csv, write_rewards_csv, CsvRow};
pub use eval::{evaluate_vs_pf, Conventional, EvalRecord, EvalSettings, FnPolicy, GreedyActor, Policy, SeedEval};
pub use mirror::MirroredEnvPair;
pub use normalize::{normalize_rates, normalize_state};
pub use train::{agent_digest, derive_seed, run_direct, run_dual, run_expert, train, RunLog, TrainOutput};
