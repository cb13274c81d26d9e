//! Multi-buffer TD3: networks, optimizer, replay and the training loop.

mod agent;
mod buffer;
mod hyper;
mod trainer;
pub mod mlp;
pub mod optim;

pub use agent::{
    actor_objective_gradient, critic_mse_gradient, Agent, Losses, Networks, Optimizers, Workspace,
};
pub use buffer::{Batch, MultiBuffer, ReplayBuffer, Transition};
pub use hyper::Td3Hyper;
pub use mlp::{Mlp, OutputActivation, Scalar, Tape};
pub use optim::{clip_gradients, Adam};
pub use trainer::{collect_episode, Collected, EpisodeLog, Trainer, TRAIN_LOG_HEADER};
