//! Agent persistence: a JSON document carrying the network layout, row-major
//! weights, the observation normalization, and the originating run config.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::agent::{DqnAgent, ObservationNormalizer};
use super::network::{Activation, DenseLayer, QNetwork};

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    /// Layer boundary sizes, e.g. `[9, 64, 64, 6]`.
    pub layer_sizes: Vec<usize>,
    /// Activation name per layer (`"relu"` / `"linear"`).
    pub activations: Vec<String>,
    /// Whether each layer carries a bias vector.
    pub has_bias: Vec<bool>,
    /// Row-major weight matrix per layer.
    pub weights: Vec<Vec<f64>>,
    /// Bias vector per layer (empty for bias-free layers).
    pub biases: Vec<Vec<f64>>,
    /// The 9 observation scales.
    pub normalization: Vec<f64>,
    /// The run configuration this agent was trained with, as recorded by the
    /// caller.
    pub origin_config: serde_json::Value,
}

impl Checkpoint {
    pub fn from_agent(agent: &DqnAgent, origin_config: serde_json::Value) -> Self {
        let layers = agent.net.layers();
        Self {
            format_version: CHECKPOINT_FORMAT_VERSION,
            layer_sizes: agent.net.layer_sizes(),
            activations: layers.iter().map(|l| l.activation.name().to_string()).collect(),
            has_bias: layers.iter().map(|l| l.has_bias()).collect(),
            weights: layers.iter().map(|l| l.weights.clone()).collect(),
            biases: layers.iter().map(|l| l.bias.clone()).collect(),
            normalization: agent.normalizer.scales.to_vec(),
            origin_config,
        }
    }

    /// Rebuild the agent, rejecting version and shape mismatches.
    pub fn into_agent(&self) -> Result<DqnAgent> {
        if self.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format version {} (expected {})",
                self.format_version, CHECKPOINT_FORMAT_VERSION
            )));
        }
        let n_layers = self.layer_sizes.len().saturating_sub(1);
        if n_layers == 0
            || self.activations.len() != n_layers
            || self.weights.len() != n_layers
            || self.biases.len() != n_layers
            || self.has_bias.len() != n_layers
        {
            return Err(Error::Checkpoint(format!(
                "inconsistent layer counts: sizes {:?}, {} activations, {} weight blocks",
                self.layer_sizes,
                self.activations.len(),
                self.weights.len()
            )));
        }
        let mut layers = Vec::with_capacity(n_layers);
        for i in 0..n_layers {
            let (inputs, outputs) = (self.layer_sizes[i], self.layer_sizes[i + 1]);
            if self.weights[i].len() != inputs * outputs {
                return Err(Error::Checkpoint(format!(
                    "layer {i}: {} weights do not match {inputs}x{outputs}",
                    self.weights[i].len()
                )));
            }
            let expected_bias = if self.has_bias[i] { outputs } else { 0 };
            if self.biases[i].len() != expected_bias {
                return Err(Error::Checkpoint(format!(
                    "layer {i}: {} bias entries, expected {expected_bias}",
                    self.biases[i].len()
                )));
            }
            layers.push(DenseLayer {
                inputs,
                outputs,
                weights: self.weights[i].clone(),
                bias: self.biases[i].clone(),
                activation: Activation::parse(&self.activations[i])?,
            });
        }
        let net = QNetwork::from_layers(layers)
            .map_err(|e| Error::Checkpoint(format!("bad layer data: {e}")))?;
        if self.normalization.len() != 9 {
            return Err(Error::Checkpoint(format!(
                "normalization must hold 9 scales, got {}",
                self.normalization.len()
            )));
        }
        let mut scales = [0.0; 9];
        scales.copy_from_slice(&self.normalization);
        if scales.iter().any(|s| !s.is_finite() || *s == 0.0) {
            return Err(Error::Checkpoint("normalization scales must be finite and nonzero".into()));
        }
        DqnAgent::from_parts(net, ObservationNormalizer { scales })
            .map_err(|e| Error::Checkpoint(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}
