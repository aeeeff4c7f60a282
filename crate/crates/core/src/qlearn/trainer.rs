//! The synchronous training loop: epsilon-greedy rollouts feeding a FIFO
//! replay memory, one Q-update per environment step after a warmup prelude.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::environment::{EnvConfig, VineEnv};
use crate::error::{Error, Result};

use super::agent::{select_action, train_step_with, DqnAgent};
use super::optimizer::{Optimizer, OptimizerKind};
use super::replay::{ReplayMemory, Transition};

/// Training hyperparameters. Defaults are the full-scale protocol; the desk
/// presets in [`crate::presets`] shrink the episode count and stretch the
/// epsilon schedule accordingly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparameters {
    /// Replay memory capacity (transitions).
    pub capacity: usize,
    /// Number of training episodes.
    pub episodes: usize,
    /// Step cap per training episode.
    pub max_episode_steps: usize,
    /// Episodes collected before the first Q-update.
    pub warmup_episodes: usize,
    pub batch_size: usize,
    pub epsilon_start: f64,
    /// Epsilon decrease per episode (`0.05` exhausts exploration after 20
    /// episodes; desk presets use `1 / (0.1 * episodes)` instead).
    pub epsilon_decrement: f64,
    pub epsilon_floor: f64,
    /// Discount factor.
    pub gamma: f64,
    /// Learning rate.
    pub alpha: f64,
    pub optimizer: OptimizerKind,
    /// Hidden-layer widths of the value network.
    pub hidden_layers: Vec<usize>,
    /// Step cap for greedy evaluation rollouts.
    pub eval_step_limit: usize,
    pub seed: u64,
    /// Sync a frozen target network every N environment steps; `None` (the
    /// default) bootstraps from the online network.
    pub target_sync_interval: Option<usize>,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            capacity: 20_000,
            episodes: 200_000,
            max_episode_steps: 100,
            warmup_episodes: 20,
            batch_size: 64,
            epsilon_start: 1.0,
            epsilon_decrement: 0.05,
            epsilon_floor: 0.0,
            gamma: 0.5,
            alpha: 0.1,
            optimizer: OptimizerKind::Adam,
            hidden_layers: vec![64, 64],
            eval_step_limit: 200,
            seed: 0,
            target_sync_interval: None,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        if self.capacity == 0 || self.episodes == 0 || self.max_episode_steps == 0 || self.batch_size == 0 {
            return Err(Error::InvalidInput(
                "capacity, episodes, max_episode_steps and batch_size must be positive".into(),
            ));
        }
        if self.batch_size > self.capacity {
            return Err(Error::InvalidInput("batch_size cannot exceed replay capacity".into()));
        }
        if !(0.0..=1.0).contains(&self.epsilon_start)
            || !(0.0..=1.0).contains(&self.epsilon_floor)
            || self.epsilon_decrement < 0.0
            || self.epsilon_floor > self.epsilon_start
        {
            return Err(Error::InvalidInput("bad epsilon schedule".into()));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::InvalidInput(format!("gamma must be in [0, 1), got {}", self.gamma)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidInput(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if self.hidden_layers.iter().any(|h| *h == 0) {
            return Err(Error::InvalidInput("hidden layer widths must be positive".into()));
        }
        if self.eval_step_limit == 0 {
            return Err(Error::InvalidInput("eval_step_limit must be positive".into()));
        }
        Ok(())
    }

    /// Exploration rate for an episode index:
    /// `max(floor, start - decrement * episode)`.
    pub fn epsilon(&self, episode: usize) -> f64 {
        (self.epsilon_start - self.epsilon_decrement * episode as f64).max(self.epsilon_floor)
    }
}

/// Per-episode training record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRecord {
    pub episode: usize,
    /// Steps until termination (goal or cap).
    pub steps: usize,
    /// Plain sum of rewards, including the terminal bonus.
    pub accumulated_reward: f64,
    /// Discounted return from the first step.
    pub discounted_return: f64,
    /// Mean Q-update loss over the episode (0 before warmup).
    pub mean_loss: f64,
    pub epsilon: f64,
    /// Q-updates performed during the episode.
    pub updates: usize,
}

#[derive(Debug, Clone, Default)]
pub struct TrainMetrics {
    pub episodes: Vec<EpisodeRecord>,
}

pub const METRICS_HEADER: &str = "episode,steps,accumulated_reward,mean_loss,epsilon,discounted_return";

impl TrainMetrics {
    /// One row per episode, delimited text with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{METRICS_HEADER}")?;
        for r in &self.episodes {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.episode, r.steps, r.accumulated_reward, r.mean_loss, r.epsilon, r.discounted_return
            )?;
        }
        Ok(())
    }

    /// Centered-window moving average of steps-to-termination.
    pub fn smoothed_steps(&self, window: usize) -> Vec<f64> {
        moving_average(&self.episodes.iter().map(|r| r.steps as f64).collect::<Vec<_>>(), window)
    }
}

pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    if values.is_empty() || window == 0 {
        return Vec::new();
    }
    let half = window / 2;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(values.len());
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Least-squares slope of `values` against their indices.
pub fn linear_regression_slope(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return 0.0;
    }
    let mean_x = (n - 1.0) / 2.0;
    let mean_y = values.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, y) in values.iter().enumerate() {
        let dx = i as f64 - mean_x;
        num += dx * (y - mean_y);
        den += dx * dx;
    }
    num / den
}

/// Run the full training protocol and return the trained agent with its
/// per-episode metrics. Deterministic for a fixed seed.
pub fn train(env_cfg: &EnvConfig, hyper: &Hyperparameters) -> Result<(DqnAgent, TrainMetrics)> {
    hyper.validate()?;
    let mut cfg = env_cfg.clone();
    cfg.max_steps = hyper.max_episode_steps;
    cfg.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut agent = DqnAgent::new(&cfg, &hyper.hidden_layers, &mut rng);
    let mut optimizer = Optimizer::new(hyper.optimizer, hyper.alpha);
    let mut memory = ReplayMemory::new(hyper.capacity);
    let mut env = VineEnv::new(cfg)?;
    let actions = env.action_set();
    let mut target_net = hyper.target_sync_interval.map(|_| agent.net.clone());
    let mut metrics = TrainMetrics::default();
    let mut global_step = 0usize;

    for episode in 0..hyper.episodes {
        let epsilon = hyper.epsilon(episode);
        let mut obs = env.reset(&mut rng);
        let mut accumulated = 0.0;
        let mut discounted = 0.0;
        let mut discount = 1.0;
        let mut loss_sum = 0.0;
        let mut updates = 0usize;
        let mut steps = 0usize;

        loop {
            let action_index = select_action(&agent, &obs, epsilon, &mut rng);
            let step = env.step(&actions[action_index])?;
            memory.push(Transition {
                state: obs,
                action_index,
                reward: step.reward,
                next_state: step.observation,
                done: step.done,
            });
            steps += 1;
            global_step += 1;
            accumulated += step.reward;
            discounted += discount * step.reward;
            discount *= hyper.gamma;

            if episode >= hyper.warmup_episodes && memory.len() >= hyper.batch_size {
                let batch = memory.sample_minibatch(hyper.batch_size, &mut rng)?;
                loss_sum +=
                    train_step_with(&mut agent, &mut optimizer, &batch, hyper.gamma, target_net.as_ref())?;
                updates += 1;
            }
            if let (Some(interval), Some(frozen)) = (hyper.target_sync_interval, target_net.as_mut()) {
                if global_step % interval == 0 {
                    *frozen = agent.net.clone();
                }
            }

            obs = step.observation;
            if step.done {
                break;
            }
        }

        metrics.episodes.push(EpisodeRecord {
            episode,
            steps,
            accumulated_reward: accumulated,
            discounted_return: discounted,
            mean_loss: if updates > 0 { loss_sum / updates as f64 } else { 0.0 },
            epsilon,
            updates,
        });
    }

    Ok((agent, metrics))
}
