//! Observation scaling, the greedy policy, and the Q-update step.

use rand::Rng;

use crate::environment::{EnvConfig, Observation};
use crate::error::{Error, Result};

use super::network::{BatchItem, QNetwork};
use super::optimizer::Optimizer;
use super::replay::Transition;

/// Per-field scales dividing the raw observation before it enters the
/// network: positions and distance by the workspace scale (`s_max`),
/// curvature by its bound, rates by their command magnitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationNormalizer {
    pub scales: [f64; 9],
}

impl ObservationNormalizer {
    pub fn from_env(cfg: &EnvConfig) -> Self {
        let guard = |v: f64| if v.abs() > 1e-12 { v.abs() } else { 1.0 };
        let workspace = guard(cfg.s_max);
        let rate = guard(cfg.kappa_rate_left.abs().max(cfg.kappa_rate_right.abs()));
        Self {
            scales: [
                workspace,
                guard(cfg.kappa_bound),
                guard(cfg.growth_rate),
                rate,
                workspace,
                workspace,
                workspace,
                workspace,
                workspace,
            ],
        }
    }

    pub fn identity() -> Self {
        Self { scales: [1.0; 9] }
    }

    pub fn normalize(&self, obs: &Observation) -> [f64; 9] {
        let raw = obs.to_array();
        std::array::from_fn(|i| raw[i] / self.scales[i])
    }
}

/// A deterministic mapping from observations to action indices.
pub trait Policy {
    fn act(&self, obs: &Observation) -> usize;
}

/// The value network plus its input normalizer.
#[derive(Debug, Clone)]
pub struct DqnAgent {
    pub net: QNetwork,
    pub normalizer: ObservationNormalizer,
}

impl DqnAgent {
    /// Fresh agent for an environment: `9 -> hidden -> 6` network.
    pub fn new<R: Rng>(cfg: &EnvConfig, hidden: &[usize], rng: &mut R) -> Self {
        Self {
            net: QNetwork::mlp(9, hidden, 6, rng),
            normalizer: ObservationNormalizer::from_env(cfg),
        }
    }

    pub fn from_parts(net: QNetwork, normalizer: ObservationNormalizer) -> Result<Self> {
        if net.input_dim() != 9 {
            return Err(Error::InvalidInput(format!(
                "agent networks take the 9-dimensional observation, got {} inputs",
                net.input_dim()
            )));
        }
        Ok(Self { net, normalizer })
    }

    pub fn q_values(&self, obs: &Observation) -> Result<Vec<f64>> {
        self.net.forward(&self.normalizer.normalize(obs))
    }
}

impl Policy for DqnAgent {
    fn act(&self, obs: &Observation) -> usize {
        let q = self.q_values(obs).expect("finite observation");
        argmax(&q)
    }
}

/// Index of the largest value; ties resolve to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Epsilon-greedy action choice: uniform over the action set with
/// probability `epsilon`, otherwise greedy.
pub fn select_action<R: Rng>(
    agent: &DqnAgent,
    obs: &Observation,
    epsilon: f64,
    rng: &mut R,
) -> usize {
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        rng.gen_range(0..agent.net.output_dim())
    } else {
        agent.act(obs)
    }
}

/// Bootstrap target `r + gamma * max_a' Q(s', a')`, with the bootstrap term
/// dropped on terminal transitions.
pub fn td_target(transition: &Transition, agent: &DqnAgent, gamma: f64) -> f64 {
    td_target_with(&agent.net, &agent.normalizer, transition, gamma)
}

pub(crate) fn td_target_with(
    value_net: &QNetwork,
    normalizer: &ObservationNormalizer,
    transition: &Transition,
    gamma: f64,
) -> f64 {
    if transition.done {
        transition.reward
    } else {
        let q = value_net
            .forward(&normalizer.normalize(&transition.next_state))
            .expect("finite observation");
        transition.reward + gamma * q.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// One Q-update on a minibatch: targets from the online network, squared
/// error on the taken action's prediction, one optimizer step. Returns the
/// pre-update mean loss.
pub fn train_step(
    agent: &mut DqnAgent,
    optimizer: &mut Optimizer,
    batch: &[Transition],
    gamma: f64,
) -> Result<f64> {
    train_step_with(agent, optimizer, batch, gamma, None)
}

/// [`train_step`] with an optional frozen target network.
pub fn train_step_with(
    agent: &mut DqnAgent,
    optimizer: &mut Optimizer,
    batch: &[Transition],
    gamma: f64,
    target_net: Option<&QNetwork>,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::InvalidInput("empty training batch".into()));
    }
    let value_net = target_net.unwrap_or(&agent.net);
    let items: Vec<BatchItem> = batch
        .iter()
        .map(|t| BatchItem {
            input: agent.normalizer.normalize(&t.state).to_vec(),
            action: t.action_index,
            target: td_target_with(value_net, &agent.normalizer, t, gamma),
        })
        .collect();
    let (loss, grads) = agent.net.loss_and_gradients(&items)?;
    optimizer.apply(&mut agent.net, &grads);
    Ok(loss)
}
