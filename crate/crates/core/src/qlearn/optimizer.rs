//! Parameter-update rules for the Q-network.

use serde::{Deserialize, Serialize};

use super::network::{Gradients, QNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    /// Adaptive-moment estimation (default).
    Adam,
    /// Plain gradient descent, the literal `theta -= alpha * dL/dtheta`.
    Sgd,
}

#[derive(Debug, Clone)]
pub struct Optimizer {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    t: u64,
    first_moment: Option<Gradients>,
    second_moment: Option<Gradients>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, learning_rate: f64) -> Self {
        Self {
            kind,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            t: 0,
            first_moment: None,
            second_moment: None,
        }
    }

    /// Apply one update from the given gradients.
    pub fn apply(&mut self, net: &mut QNetwork, grads: &Gradients) {
        match self.kind {
            OptimizerKind::Sgd => self.apply_sgd(net, grads),
            OptimizerKind::Adam => self.apply_adam(net, grads),
        }
    }

    fn apply_sgd(&mut self, net: &mut QNetwork, grads: &Gradients) {
        let lr = self.learning_rate;
        for (i, layer) in net.layers_mut().iter_mut().enumerate() {
            for (w, g) in layer.weights.iter_mut().zip(&grads.weights[i]) {
                *w -= lr * g;
            }
            for (b, g) in layer.bias.iter_mut().zip(&grads.biases[i]) {
                *b -= lr * g;
            }
        }
    }

    fn apply_adam(&mut self, net: &mut QNetwork, grads: &Gradients) {
        if self.first_moment.is_none() {
            self.first_moment = Some(Gradients::zeros_like(net));
            self.second_moment = Some(Gradients::zeros_like(net));
        }
        self.t += 1;
        let m = self.first_moment.as_mut().unwrap();
        let v = self.second_moment.as_mut().unwrap();
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        let lr = self.learning_rate;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.epsilon);

        let update = |param: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *param -= lr * m_hat / (v_hat.sqrt() + eps);
        };

        for (i, layer) in net.layers_mut().iter_mut().enumerate() {
            for ((w, &g), (mw, vw)) in layer
                .weights
                .iter_mut()
                .zip(&grads.weights[i])
                .zip(m.weights[i].iter_mut().zip(v.weights[i].iter_mut()))
            {
                update(w, g, mw, vw);
            }
            for ((b, &g), (mb, vb)) in layer
                .bias
                .iter_mut()
                .zip(&grads.biases[i])
                .zip(m.biases[i].iter_mut().zip(v.biases[i].iter_mut()))
            {
                update(b, g, mb, vb);
            }
        }
    }
}
