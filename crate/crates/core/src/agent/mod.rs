//! DDPG scheduling agent: networks, optimizer, replay and checkpoints.

pub mod adam;
pub mod checkpoint;
pub mod ddpg;
pub mod mlp;
pub mod replay;

pub use adam::Adam;
pub use ddpg::{act, scheduled_ue, DdpgAgent, Hyperparams, Networks, TrainStats};
pub use mlp::{soft_update, softmax, ForwardCache, Mlp, OutputActivation};
pub use replay::{is_on_simplex, ReplayBuffer, Transition};
