//! Deep Q-learning: value network with manual backpropagation, FIFO replay,
//! epsilon-greedy action sampling, the synchronous training loop, and the
//! greedy evaluation protocols.

pub mod agent;
pub mod checkpoint;
pub mod eval;
pub mod network;
pub mod optimizer;
pub mod replay;
pub mod trainer;

pub use agent::{argmax, select_action, td_target, train_step, train_step_with, DqnAgent, ObservationNormalizer, Policy};
pub use checkpoint::{Checkpoint, CHECKPOINT_FORMAT_VERSION};
pub use eval::{
    evaluate, heatmap, histogram, rollout, EvalReport, GridSpec, HeatmapCell, HeatmapGrid,
    HistogramBin, RolloutRecord, TrialOutcome,
};
pub use network::{Activation, BatchItem, DenseLayer, Gradients, QNetwork};
pub use optimizer::{Optimizer, OptimizerKind};
pub use replay::{ReplayMemory, Transition};
pub use trainer::{
    linear_regression_slope, moving_average, train, EpisodeRecord, Hyperparameters, TrainMetrics,
    METRICS_HEADER,
};
