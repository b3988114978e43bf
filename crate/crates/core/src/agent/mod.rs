//! Deep Q-learning: network, replay memory, and the training step.

mod dqn;
mod network;
mod replay;

pub use dqn::{
    argmax_lowest, batch_gradients, batch_loss, dqn_train_step, q_of_first_action, select_action,
    sync_target, td_targets, DqnParams,
};
pub use network::{Gradients, QNetwork, Workspace};
pub use replay::{ReplayBuffer, Transition};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("state length {got} does not match network input width {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("training diverged: loss {loss} is not finite")]
    NonFiniteLoss { loss: f64 },
    #[error("training batch is empty")]
    EmptyBatch,
    #[error("replay buffer holds {len} transitions, need {batch}")]
    BufferTooSmall { len: usize, batch: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
