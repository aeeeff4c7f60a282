//! Feed-forward value network with hand-written backpropagation.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Linear,
}

impl Activation {
    pub fn name(&self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Linear => "linear",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "relu" => Ok(Activation::Relu),
            "linear" => Ok(Activation::Linear),
            other => Err(Error::Checkpoint(format!("unknown activation '{other}'"))),
        }
    }

    fn apply(&self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Linear => z,
        }
    }

    fn derivative(&self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
        }
    }
}

/// Fully connected layer. Weights are row-major, one row per output unit;
/// `bias` is empty for bias-free layers (used by the tabular lookup tests).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    /// Scaled-uniform (Xavier) initialization, zero bias.
    pub fn xavier<R: Rng>(inputs: usize, outputs: usize, activation: Activation, rng: &mut R) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let weights = (0..inputs * outputs).map(|_| rng.gen_range(-limit..limit)).collect();
        Self { inputs, outputs, weights, bias: vec![0.0; outputs], activation }
    }

    pub fn zeros(inputs: usize, outputs: usize, activation: Activation, with_bias: bool) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: if with_bias { vec![0.0; outputs] } else { Vec::new() },
            activation,
        }
    }

    pub fn has_bias(&self) -> bool {
        !self.bias.is_empty()
    }

    fn validate(&self) -> Result<()> {
        if self.weights.len() != self.inputs * self.outputs {
            return Err(Error::InvalidInput(format!(
                "layer weight count {} does not match {}x{}",
                self.weights.len(),
                self.outputs,
                self.inputs
            )));
        }
        if !self.bias.is_empty() && self.bias.len() != self.outputs {
            return Err(Error::InvalidInput(format!(
                "layer bias count {} does not match {} outputs",
                self.bias.len(),
                self.outputs
            )));
        }
        if self.weights.iter().chain(self.bias.iter()).any(|w| !w.is_finite()) {
            return Err(Error::InvalidInput("non-finite layer parameter".into()));
        }
        Ok(())
    }

    /// `z = W x (+ b)`, then the activation; writes both into the buffers.
    fn forward_into(&self, input: &[f64], pre: &mut Vec<f64>, out: &mut Vec<f64>) {
        pre.clear();
        out.clear();
        for o in 0..self.outputs {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            let mut z: f64 = row.iter().zip(input).map(|(w, x)| w * x).sum();
            if let Some(b) = self.bias.get(o) {
                z += b;
            }
            pre.push(z);
            out.push(self.activation.apply(z));
        }
    }
}

/// Gradient (or moment) buffers shaped like a network's parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &QNetwork) -> Self {
        Self {
            weights: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: net.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }

    fn scale(&mut self, factor: f64) {
        for v in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            for g in v.iter_mut() {
                *g *= factor;
            }
        }
    }
}

/// One supervised sample for a Q-update: the network input, the action whose
/// value is being regressed, and its fixed target.
#[derive(Debug, Clone)]
pub struct BatchItem {
    pub input: Vec<f64>,
    pub action: usize,
    pub target: f64,
}

/// Feed-forward action-value network.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    layers: Vec<DenseLayer>,
}

impl QNetwork {
    /// Standard shape: ReLU hidden layers, linear output, Xavier weights.
    pub fn mlp<R: Rng>(input_dim: usize, hidden: &[usize], output_dim: usize, rng: &mut R) -> Self {
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut prev = input_dim;
        for &h in hidden {
            layers.push(DenseLayer::xavier(prev, h, Activation::Relu, rng));
            prev = h;
        }
        layers.push(DenseLayer::xavier(prev, output_dim, Activation::Linear, rng));
        Self { layers }
    }

    pub fn from_layers(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidInput("network needs at least one layer".into()));
        }
        for l in &layers {
            l.validate()?;
        }
        for pair in layers.windows(2) {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::InvalidInput(format!(
                    "layer size mismatch: {} outputs feed {} inputs",
                    pair[0].outputs, pair[1].inputs
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().outputs
    }

    /// Layer boundary sizes, e.g. `[9, 64, 64, 6]`.
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.input_dim()];
        sizes.extend(self.layers.iter().map(|l| l.outputs));
        sizes
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Action values for one input.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_dim() {
            return Err(Error::InvalidInput(format!(
                "expected {} inputs, got {}",
                self.input_dim(),
                input.len()
            )));
        }
        if input.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite network input".into()));
        }
        let mut pre = Vec::new();
        let mut cur = input.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            layer.forward_into(&cur, &mut pre, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Mean squared-error loss `1/B * sum 1/2 (target - Q(input)[action])^2`
    /// over the batch and its gradient with respect to every parameter.
    /// Targets are fixed numbers; gradients flow only through predictions.
    pub fn loss_and_gradients(&self, batch: &[BatchItem]) -> Result<(f64, Gradients)> {
        if batch.is_empty() {
            return Err(Error::InvalidInput("empty training batch".into()));
        }
        let n_layers = self.layers.len();
        let mut grads = Gradients::zeros_like(self);
        let mut pre: Vec<Vec<f64>> = self.layers.iter().map(|l| Vec::with_capacity(l.outputs)).collect();
        let mut act: Vec<Vec<f64>> = self.layers.iter().map(|l| Vec::with_capacity(l.outputs)).collect();
        let mut loss_sum = 0.0;

        for item in batch {
            if item.action >= self.output_dim() {
                return Err(Error::InvalidInput(format!(
                    "action index {} out of range for {} outputs",
                    item.action,
                    self.output_dim()
                )));
            }
            if item.input.len() != self.input_dim() {
                return Err(Error::InvalidInput("batch input dimension mismatch".into()));
            }

            // Forward pass, caching pre-activations and activations.
            for (i, layer) in self.layers.iter().enumerate() {
                let (before, rest) = act.split_at_mut(i);
                let input: &[f64] = if i == 0 { &item.input } else { &before[i - 1] };
                layer.forward_into(input, &mut pre[i], &mut rest[0]);
            }
            let prediction = act[n_layers - 1][item.action];
            let err = prediction - item.target;
            loss_sum += 0.5 * err * err;

            // Backward pass: output delta is sparse (only the taken action).
            let mut delta = vec![0.0; self.output_dim()];
            delta[item.action] =
                err * self.layers[n_layers - 1].activation.derivative(pre[n_layers - 1][item.action]);
            for i in (0..n_layers).rev() {
                let layer = &self.layers[i];
                let input: &[f64] = if i == 0 { &item.input } else { &act[i - 1] };
                let gw = &mut grads.weights[i];
                for (o, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    let row = &mut gw[o * layer.inputs..(o + 1) * layer.inputs];
                    for (g, x) in row.iter_mut().zip(input) {
                        *g += d * x;
                    }
                    if layer.has_bias() {
                        grads.biases[i][o] += d;
                    }
                }
                if i == 0 {
                    break;
                }
                // delta for the previous layer: W^T delta * act'(pre)
                let mut prev_delta = vec![0.0; layer.inputs];
                for (o, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    for (p, w) in prev_delta.iter_mut().zip(row) {
                        *p += d * w;
                    }
                }
                let prev_layer = &self.layers[i - 1];
                for (p, z) in prev_delta.iter_mut().zip(&pre[i - 1]) {
                    *p *= prev_layer.activation.derivative(*z);
                }
                delta = prev_delta;
            }
        }

        let scale = 1.0 / batch.len() as f64;
        grads.scale(scale);
        Ok((loss_sum * scale, grads))
    }

    /// Flattened copy of all parameters (weights then bias, layer by layer).
    pub fn flat_parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_flat_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.parameter_count() {
            return Err(Error::InvalidInput(format!(
                "expected {} parameters, got {}",
                self.parameter_count(),
                params.len()
            )));
        }
        let mut offset = 0;
        for l in &mut self.layers {
            let wlen = l.weights.len();
            l.weights.copy_from_slice(&params[offset..offset + wlen]);
            offset += wlen;
            let blen = l.bias.len();
            l.bias.copy_from_slice(&params[offset..offset + blen]);
            offset += blen;
        }
        Ok(())
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_outputs_zero() {
        let net = QNetwork::from_layers(vec![
            DenseLayer::zeros(9, 16, Activation::Relu, true),
            DenseLayer::zeros(16, 6, Activation::Linear, true),
        ])
        .unwrap();
        let out = net.forward(&[0.3; 9]).unwrap();
        assert_eq!(out, vec![0.0; 6]);
    }

    #[test]
    fn identity_like_layer_selects_inputs() {
        // Single linear layer that copies inputs 0 and 4 to the outputs.
        let mut layer = DenseLayer::zeros(9, 2, Activation::Linear, true);
        layer.weights[0] = 1.0; // output 0 <- input 0
        layer.weights[9 + 4] = 1.0; // output 1 <- input 4
        let net = QNetwork::from_layers(vec![layer]).unwrap();
        let input = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
        let out = net.forward(&input).unwrap();
        assert_eq!(out, vec![0.1, 0.5]);
    }

    /// Straightforward duplicate implementation used as an oracle.
    fn naive_forward(net: &QNetwork, input: &[f64]) -> Vec<f64> {
        let mut cur = input.to_vec();
        for layer in net.layers() {
            let mut next = vec![0.0; layer.outputs];
            for o in 0..layer.outputs {
                let mut z = if layer.has_bias() { layer.bias[o] } else { 0.0 };
                for i in 0..layer.inputs {
                    z += layer.weights[o * layer.inputs + i] * cur[i];
                }
                next[o] = match layer.activation {
                    Activation::Relu => z.max(0.0),
                    Activation::Linear => z,
                };
            }
            cur = next;
        }
        cur
    }

    #[test]
    fn forward_matches_duplicate_implementation() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let net = QNetwork::mlp(9, &[64, 64], 6, &mut rng);
        for _ in 0..25 {
            let input: Vec<f64> = (0..9).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let ours = net.forward(&input).unwrap();
            let oracle = naive_forward(&net, &input);
            for (a, b) in ours.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn forward_rejects_bad_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let net = QNetwork::mlp(9, &[8], 6, &mut rng);
        assert!(net.forward(&[0.0; 4]).is_err());
        let mut bad = [0.0; 9];
        bad[3] = f64::NAN;
        assert!(net.forward(&bad).is_err());
    }

    #[test]
    fn zero_error_batch_gives_zero_loss_and_gradient() {
        let net = QNetwork::from_layers(vec![
            DenseLayer::zeros(9, 8, Activation::Relu, true),
            DenseLayer::zeros(8, 6, Activation::Linear, true),
        ])
        .unwrap();
        let batch = vec![BatchItem { input: vec![0.5; 9], action: 3, target: 0.0 }];
        let (loss, grads) = net.loss_and_gradients(&batch).unwrap();
        assert_eq!(loss, 0.0);
        for g in grads.weights.iter().chain(grads.biases.iter()) {
            assert!(g.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn gradient_matches_central_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let mut net = QNetwork::mlp(9, &[12, 10], 6, &mut rng);
        let batch: Vec<BatchItem> = (0..16)
            .map(|_| BatchItem {
                input: (0..9).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                action: rng.gen_range(0..6),
                target: rng.gen_range(-5.0..5.0),
            })
            .collect();
        let (_, grads) = net.loss_and_gradients(&batch).unwrap();

        // Flatten analytic gradients in the same order as flat_parameters.
        let mut flat_grads = Vec::new();
        for (w, b) in grads.weights.iter().zip(&grads.biases) {
            flat_grads.extend_from_slice(w);
            flat_grads.extend_from_slice(b);
        }

        let params = net.flat_parameters();
        let total = params.len();
        let h = 1e-6;
        let mut checked = 0;
        while checked < 100 {
            let idx = rng.gen_range(0..total);
            let mut plus = params.clone();
            plus[idx] += h;
            net.set_flat_parameters(&plus).unwrap();
            let (lp, _) = net.loss_and_gradients(&batch).unwrap();
            let mut minus = params.clone();
            minus[idx] -= h;
            net.set_flat_parameters(&minus).unwrap();
            let (lm, _) = net.loss_and_gradients(&batch).unwrap();
            let fd = (lp - lm) / (2.0 * h);
            let analytic = flat_grads[idx];
            let denom = analytic.abs().max(fd.abs()).max(1e-8);
            assert!(
                (analytic - fd).abs() / denom < 1e-4,
                "param {idx}: analytic {analytic} vs fd {fd}"
            );
            checked += 1;
        }
        net.set_flat_parameters(&params).unwrap();
    }

    #[test]
    fn flat_parameter_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let mut net = QNetwork::mlp(9, &[8], 6, &mut rng);
        let params = net.flat_parameters();
        assert_eq!(params.len(), net.parameter_count());
        let doubled: Vec<f64> = params.iter().map(|p| 2.0 * p).collect();
        net.set_flat_parameters(&doubled).unwrap();
        assert_eq!(net.flat_parameters(), doubled);
        assert!(net.set_flat_parameters(&[0.0]).is_err());
    }
}
