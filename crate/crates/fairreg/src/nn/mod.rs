//! Dense MLP engine: affine+activation layers, batched forward/backward,
//! gradient reversal, weight clipping, and Glorot initialization.
//!
//! A model part is a plain `Vec<Layer>`; the three parts of an [`MlpModel`]
//! (feature map `g`, regression head `h`, adversary/critic `f`) are all
//! driven by the same [`forward`]/[`backward`] pair. Losses live in
//! [`loss`], parameter updates in [`optim`].

use rand::distributions::{Distribution, Uniform};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{RealMatrix, RealVector};

pub mod loss;
pub mod optim;

pub use loss::{bce_loss, mse_loss, wasserstein_penalty};
pub use optim::{clip_weights, LayerGrads, OptimizerConfig, OptimizerKind, OptimizerState};

/// Element-wise activation applied after the affine transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Sigmoid,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the post-activation output.
    #[inline]
    fn grad_from_output(self, out: f64) -> f64 {
        match self {
            Activation::Relu => {
                if out > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => out * (1.0 - out),
            Activation::Identity => 1.0,
        }
    }
}

/// Dense layer: `y = activation(W x + b)` with `W` stored `(out x in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: RealMatrix,
    pub bias: RealVector,
    pub activation: Activation,
}

impl Layer {
    /// Glorot-uniform weights, zero bias.
    pub fn glorot<R: Rng + ?Sized>(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        Layer {
            weights: init_glorot(out_dim, in_dim, rng),
            bias: vec![0.0; out_dim],
            activation,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }
}

/// Glorot/Xavier-uniform matrix: entries in `±sqrt(6/(fan_in+fan_out))`.
///
/// `rows` is the output (fan-out) dimension, `cols` the input (fan-in).
pub fn init_glorot<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> RealMatrix {
    assert!(rows > 0 && cols > 0, "init_glorot requires positive dims");
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let dist = Uniform::new_inclusive(-limit, limit);
    let data = (0..rows * cols).map(|_| dist.sample(rng)).collect();
    RealMatrix::from_vec(rows, cols, data).expect("glorot data is finite by construction")
}

/// Which game the third network plays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryKind {
    /// Binary discriminator trained with cross-entropy; ends in Sigmoid.
    CrossEntropy,
    /// Wasserstein witness function; ends in Identity, weights clipped.
    WassersteinCritic,
    /// No adversary (plain regression).
    None,
}

/// Min/max of the training-split targets, used to scale the label fed to
/// the adversary into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct YScale {
    pub min: f64,
    pub max: f64,
}

impl YScale {
    pub fn fit(y: &[f64]) -> Self {
        let min = y.iter().copied().fold(f64::INFINITY, f64::min);
        let max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        YScale { min, max }
    }

    #[inline]
    pub fn apply(&self, y: f64) -> f64 {
        let range = self.max - self.min;
        if range > 0.0 {
            (y - self.min) / range
        } else {
            0.0
        }
    }
}

/// Feature map `g`, regression head `h`, and adversary/critic `f`.
#[derive(Debug, Clone)]
pub struct MlpModel {
    pub feature_map: Vec<Layer>,
    pub head: Vec<Layer>,
    pub adversary: Vec<Layer>,
    pub adversary_kind: AdversaryKind,
    pub y_scale: YScale,
}

impl MlpModel {
    /// Checks dimension chaining and the adversary contract:
    /// adversary input is the feature width plus one (the label channel),
    /// cross-entropy adversaries end in Sigmoid, critics in Identity.
    pub fn validate(&self, input_dim: usize) -> Result<()> {
        let feat_out = check_chain("feature_map", &self.feature_map, input_dim)?;
        let head_out = check_chain("head", &self.head, feat_out)?;
        if head_out != 1 {
            return Err(Error::Config(format!(
                "head must end in a single output, got {head_out}"
            )));
        }
        match self.adversary_kind {
            AdversaryKind::None => {
                if !self.adversary.is_empty() {
                    return Err(Error::Config(
                        "adversary layers present with adversary_kind = none".into(),
                    ));
                }
            }
            kind => {
                let adv_out = check_chain("adversary", &self.adversary, feat_out + 1)?;
                if adv_out != 1 {
                    return Err(Error::Config(format!(
                        "adversary must end in a single output, got {adv_out}"
                    )));
                }
                let last = self
                    .adversary
                    .last()
                    .ok_or_else(|| Error::Config("adversary has no layers".into()))?;
                let want = match kind {
                    AdversaryKind::CrossEntropy => Activation::Sigmoid,
                    AdversaryKind::WassersteinCritic => Activation::Identity,
                    AdversaryKind::None => unreachable!(),
                };
                if last.activation != want {
                    return Err(Error::Config(format!(
                        "adversary output activation must be {want:?} for {kind:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Feature width produced by `g` (the adversary sees this plus one).
    pub fn feature_dim(&self) -> usize {
        self.feature_map
            .last()
            .map(Layer::out_dim)
            .unwrap_or_else(|| self.head.first().map_or(0, Layer::in_dim))
    }

    /// Full regression pass `h(g(x))`, returning one prediction per row.
    pub fn predict(&self, x: &RealMatrix) -> Result<RealVector> {
        let (z, _) = forward(&self.feature_map, x)?;
        let (out, _) = forward(&self.head, &z)?;
        Ok(out.as_column_slice().to_vec())
    }
}

fn check_chain(name: &str, layers: &[Layer], input_dim: usize) -> Result<usize> {
    let mut dim = input_dim;
    for (i, layer) in layers.iter().enumerate() {
        if layer.in_dim() != dim {
            return Err(Error::Config(format!(
                "{name} layer {i} expects {} inputs, got {dim}",
                layer.in_dim()
            )));
        }
        if layer.bias.len() != layer.out_dim() {
            return Err(Error::Config(format!(
                "{name} layer {i} bias length {} != out dim {}",
                layer.bias.len(),
                layer.out_dim()
            )));
        }
        dim = layer.out_dim();
    }
    Ok(dim)
}

/// Per-layer activations recorded during a forward pass.
///
/// `inputs[k]` is what layer `k` saw; `outputs[k]` its post-activation
/// output. Both are needed to backpropagate.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    inputs: Vec<RealMatrix>,
    outputs: Vec<RealMatrix>,
}

impl ForwardCache {
    pub fn layer_output(&self, k: usize) -> &RealMatrix {
        &self.outputs[k]
    }
}

/// Runs `input` through a layer stack, returning the batch output and the
/// cache required by [`backward`]. An empty stack is the identity.
pub fn forward(part: &[Layer], input: &RealMatrix) -> Result<(RealMatrix, ForwardCache)> {
    let mut cache = ForwardCache { inputs: Vec::with_capacity(part.len()), outputs: Vec::with_capacity(part.len()) };
    let mut current = input.clone();
    for layer in part {
        if current.cols() != layer.in_dim() {
            return Err(Error::Shape(format!(
                "forward: input has {} columns, layer expects {}",
                current.cols(),
                layer.in_dim()
            )));
        }
        // z = x W^T + b, y = act(z)
        let mut out = current.matmul_transpose_b(&layer.weights)?;
        let (rows, cols) = (out.rows(), out.cols());
        let data = out.data_mut();
        for r in 0..rows {
            for c in 0..cols {
                let z = data[r * cols + c] + layer.bias[c];
                data[r * cols + c] = layer.activation.apply(z);
            }
        }
        cache.inputs.push(current);
        current = out.clone();
        cache.outputs.push(out);
    }
    Ok((current, cache))
}

/// Backpropagates `output_grad` through the stack that produced `cache`.
///
/// Returns the gradient of the scalar loss with respect to every weight and
/// bias (ordered like `part`) and with respect to the stack input.
pub fn backward(
    part: &[Layer],
    cache: &ForwardCache,
    output_grad: &RealMatrix,
) -> Result<(Vec<LayerGrads>, RealMatrix)> {
    if cache.inputs.len() != part.len() {
        return Err(Error::Shape("backward: cache does not match layer stack".into()));
    }
    if let Some(last) = cache.outputs.last() {
        if output_grad.rows() != last.rows() || output_grad.cols() != last.cols() {
            return Err(Error::Shape(format!(
                "backward: output_grad is {}x{}, expected {}x{}",
                output_grad.rows(),
                output_grad.cols(),
                last.rows(),
                last.cols()
            )));
        }
    }
    let mut grads = vec![
        LayerGrads { weights: RealMatrix::zeros(0, 0), bias: Vec::new() };
        part.len()
    ];
    let mut grad = output_grad.clone();
    for k in (0..part.len()).rev() {
        let layer = &part[k];
        let out = &cache.outputs[k];
        // dZ = dOut ⊙ act'(out)
        let mut dz = grad.clone();
        {
            let (rows, cols) = (dz.rows(), dz.cols());
            let dz_data = dz.data_mut();
            let out_data = out.data();
            for i in 0..rows * cols {
                dz_data[i] *= layer.activation.grad_from_output(out_data[i]);
            }
        }
        // dW = dZ^T X  (out x in), db = column sums of dZ
        let dw = dz.matmul_transpose_a(&cache.inputs[k])?;
        let mut db = vec![0.0; layer.out_dim()];
        for r in 0..dz.rows() {
            for (c, b) in db.iter_mut().enumerate() {
                *b += dz.get(r, c);
            }
        }
        // dX = dZ W  (batch x in)
        grad = dz.matmul(&layer.weights)?;
        grads[k] = LayerGrads { weights: dw, bias: db };
    }
    Ok((grads, grad))
}

/// Gradient reversal: the forward pass is the identity, the backward pass
/// multiplies the upstream gradient by exactly `-lambda`.
pub fn grl_backward(upstream_grad: &RealMatrix, lambda: f64) -> RealMatrix {
    upstream_grad.scale(-lambda)
}
