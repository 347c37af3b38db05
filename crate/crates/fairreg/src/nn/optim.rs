//! SGD and Adadelta parameter updates, plus hard weight clipping for the
//! Wasserstein critic.

use serde::{Deserialize, Serialize};

use crate::linalg::RealMatrix;
use crate::nn::Layer;

/// Gradients for one layer, shaped like the layer's parameters.
#[derive(Debug, Clone)]
pub struct LayerGrads {
    pub weights: RealMatrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd,
    Adadelta,
}

/// Optimizer settings; one `OptimizerState` is instantiated per model part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    /// Adadelta decay rate; ignored by SGD.
    #[serde(default = "default_rho")]
    pub adadelta_rho: f64,
    /// Adadelta smoothing constant; ignored by SGD.
    #[serde(default = "default_eps")]
    pub adadelta_eps: f64,
}

fn default_rho() -> f64 {
    0.9
}

fn default_eps() -> f64 {
    1e-6
}

impl OptimizerConfig {
    pub fn sgd(learning_rate: f64) -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Sgd,
            learning_rate,
            adadelta_rho: default_rho(),
            adadelta_eps: default_eps(),
        }
    }

    pub fn adadelta(learning_rate: f64) -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Adadelta,
            learning_rate,
            adadelta_rho: default_rho(),
            adadelta_eps: default_eps(),
        }
    }

    pub fn validate(&self) -> crate::error::Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(crate::error::Error::Config(
                "learning_rate must be finite and >= 0".into(),
            ));
        }
        if self.kind == OptimizerKind::Adadelta {
            if !(self.adadelta_rho > 0.0 && self.adadelta_rho < 1.0) {
                return Err(crate::error::Error::Config("adadelta_rho must be in (0,1)".into()));
            }
            if self.adadelta_eps <= 0.0 {
                return Err(crate::error::Error::Config("adadelta_eps must be > 0".into()));
            }
        }
        Ok(())
    }
}

/// Running Adadelta accumulators for one parameter tensor: squared-gradient
/// average and squared-update average.
#[derive(Debug, Clone)]
struct Accumulator {
    grad_sq: Vec<f64>,
    update_sq: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct OptimizerState {
    config: OptimizerConfig,
    /// Per layer: one accumulator for the weights, one for the bias.
    /// Empty until the first Adadelta step.
    accumulators: Vec<(Accumulator, Accumulator)>,
}

impl OptimizerState {
    pub fn new(config: OptimizerConfig) -> Self {
        OptimizerState { config, accumulators: Vec::new() }
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    /// Applies one update to every layer of `part`.
    pub fn step(&mut self, part: &mut [Layer], grads: &[LayerGrads]) {
        assert_eq!(part.len(), grads.len(), "optimizer_step: layer/grad count mismatch");
        match self.config.kind {
            OptimizerKind::Sgd => {
                let lr = self.config.learning_rate;
                for (layer, g) in part.iter_mut().zip(grads) {
                    for (p, &dg) in layer.weights.data_mut().iter_mut().zip(g.weights.data()) {
                        *p -= lr * dg;
                    }
                    for (p, &dg) in layer.bias.iter_mut().zip(&g.bias) {
                        *p -= lr * dg;
                    }
                }
            }
            OptimizerKind::Adadelta => {
                if self.accumulators.is_empty() {
                    self.accumulators = part
                        .iter()
                        .map(|l| {
                            (
                                Accumulator {
                                    grad_sq: vec![0.0; l.weights.data().len()],
                                    update_sq: vec![0.0; l.weights.data().len()],
                                },
                                Accumulator {
                                    grad_sq: vec![0.0; l.bias.len()],
                                    update_sq: vec![0.0; l.bias.len()],
                                },
                            )
                        })
                        .collect();
                }
                let (lr, rho, eps) =
                    (self.config.learning_rate, self.config.adadelta_rho, self.config.adadelta_eps);
                for ((layer, g), (w_acc, b_acc)) in
                    part.iter_mut().zip(grads).zip(&mut self.accumulators)
                {
                    adadelta_update(layer.weights.data_mut(), g.weights.data(), w_acc, lr, rho, eps);
                    adadelta_update(&mut layer.bias, &g.bias, b_acc, lr, rho, eps);
                }
            }
        }
    }
}

/// v <- rho v + (1-rho) g^2; dx = sqrt(u+eps)/sqrt(v+eps) g;
/// u <- rho u + (1-rho) dx^2; p <- p - lr dx.
fn adadelta_update(
    params: &mut [f64],
    grads: &[f64],
    acc: &mut Accumulator,
    lr: f64,
    rho: f64,
    eps: f64,
) {
    for i in 0..params.len() {
        let g = grads[i];
        acc.grad_sq[i] = rho * acc.grad_sq[i] + (1.0 - rho) * g * g;
        let dx = ((acc.update_sq[i] + eps).sqrt() / (acc.grad_sq[i] + eps).sqrt()) * g;
        acc.update_sq[i] = rho * acc.update_sq[i] + (1.0 - rho) * dx * dx;
        params[i] -= lr * dx;
    }
}

/// Clamps every weight and bias entry of the given layers to `[-c, c]`.
pub fn clip_weights(layers: &mut [Layer], c: f64) {
    assert!(c > 0.0, "clip_weights requires c > 0");
    for layer in layers {
        for w in layer.weights.data_mut() {
            *w = w.clamp(-c, c);
        }
        for b in &mut layer.bias {
            *b = b.clamp(-c, c);
        }
    }
}
