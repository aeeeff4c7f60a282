//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument was non-finite or outside its documented domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The operation is only defined for a subset of configurations
    /// (e.g. planar queries require `phi = 0`).
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// `step` was called on an episode that already terminated.
    #[error("episode already finished; call reset before stepping again")]
    EpisodeFinished,

    /// The replay memory does not yet hold enough transitions for a minibatch.
    #[error("replay memory not ready: holds {have} transitions, need {need}")]
    ReplayNotReady { have: usize, need: usize },

    /// A checkpoint could not be decoded into a usable agent.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(#[from] serde_json::Error),
}
