//! A minimal dense-network engine: layers, forward/backward passes, Adam,
//! and finite-difference gradient verification.
//!
//! Batches are `(n x d)` row-major; layer weights are `(in x out)` so a
//! forward step is `y = act(x W + b)`. The backward pass consumes the cache
//! produced by [`Network::forward`] and also returns the gradient with
//! respect to the batch itself, which lets callers chain networks (the
//! generator feeds two discriminators).

use rand::Rng;

use crate::error::{Error, Result};
use crate::loss::Loss;
use crate::tensor::Tensor2;

/// Default negative slope of the leaky rectifier.
pub const DEFAULT_LEAKY_SLOPE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    LeakyRectifier(f64),
    Tanh,
    Sigmoid,
    Identity,
}

impl Activation {
    pub fn leaky() -> Self {
        Activation::LeakyRectifier(DEFAULT_LEAKY_SLOPE)
    }

    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::LeakyRectifier(s) => {
                if z > 0.0 {
                    z
                } else {
                    s * z
                }
            }
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => sigmoid(z),
            Activation::Identity => z,
        }
    }

    #[inline]
    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::LeakyRectifier(s) => {
                if z > 0.0 {
                    1.0
                } else {
                    s
                }
            }
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Sigmoid => {
                let p = sigmoid(z);
                p * (1.0 - p)
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Numerically stable logistic function.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LayerSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        LayerSpec {
            in_dim,
            out_dim,
            activation,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Layer {
    /// `(in x out)` weight matrix.
    pub weight: Tensor2,
    /// `(1 x out)` bias row.
    pub bias: Tensor2,
    pub activation: Activation,
}

impl Layer {
    pub fn in_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.cols()
    }
}

/// A feed-forward network with composing layer shapes.
#[derive(Debug, Clone)]
pub struct Network {
    layers: Vec<Layer>,
}

impl Network {
    /// Glorot-uniform weights (`+-sqrt(6/(fan_in+fan_out))`), zero biases.
    pub fn new<R: Rng + ?Sized>(specs: &[LayerSpec], rng: &mut R) -> Result<Self> {
        let mut net = Network::zeros(specs)?;
        for layer in &mut net.layers {
            let limit = (6.0 / (layer.in_dim() + layer.out_dim()) as f64).sqrt();
            for w in layer.weight.data_mut() {
                *w = rng.random_range(-limit..limit);
            }
        }
        Ok(net)
    }

    pub fn zeros(specs: &[LayerSpec]) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::EmptyInput("network needs at least one layer".into()));
        }
        for (k, pair) in specs.windows(2).enumerate() {
            if pair[0].out_dim != pair[1].in_dim {
                return Err(Error::ShapeMismatch {
                    context: format!("layer {} -> {}", k, k + 1),
                    expected: format!("in_dim {}", pair[0].out_dim),
                    actual: format!("in_dim {}", pair[1].in_dim),
                });
            }
        }
        let layers = specs
            .iter()
            .map(|s| {
                if s.in_dim == 0 || s.out_dim == 0 {
                    return Err(Error::EmptyInput("layer dims must be positive".into()));
                }
                Ok(Layer {
                    weight: Tensor2::zeros(s.in_dim, s.out_dim),
                    bias: Tensor2::zeros(1, s.out_dim),
                    activation: s.activation,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Network { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("nonempty").out_dim()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.data().len() + l.bias.data().len())
            .sum()
    }

    /// Forward pass over a batch, returning the output together with the
    /// cache the backward pass needs.
    pub fn forward(&self, batch: &Tensor2) -> Result<ForwardPass> {
        if batch.cols() != self.input_dim() {
            return Err(Error::ShapeMismatch {
                context: "forward".into(),
                expected: format!("batch with {} columns", self.input_dim()),
                actual: format!("{}x{} batch", batch.rows(), batch.cols()),
            });
        }
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        let mut x = batch.clone();
        for layer in &self.layers {
            let mut z = x.matmul(&layer.weight)?;
            z.add_row_broadcast(&layer.bias)?;
            let a = z.map(|v| layer.activation.apply(v));
            if let Some(i) = a.first_non_finite() {
                return Err(Error::NonFinite {
                    context: "forward activations".into(),
                    index: i,
                });
            }
            inputs.push(x);
            pre_activations.push(z);
            x = a;
        }
        Ok(ForwardPass {
            output: x,
            inputs,
            pre_activations,
        })
    }

    /// Convenience forward that discards the cache.
    pub fn output(&self, batch: &Tensor2) -> Result<Tensor2> {
        Ok(self.forward(batch)?.output)
    }

    /// Backpropagates `upstream` (dLoss/dOutput) through the cached pass.
    ///
    /// The cache must have been produced by a network of identical shape;
    /// anything else is rejected.
    pub fn backward(&self, pass: &ForwardPass, upstream: &Tensor2) -> Result<Gradients> {
        if pass.inputs.len() != self.layers.len() {
            return Err(Error::CacheMismatch(format!(
                "cache holds {} layers, network has {}",
                pass.inputs.len(),
                self.layers.len()
            )));
        }
        for (k, layer) in self.layers.iter().enumerate() {
            if pass.inputs[k].cols() != layer.in_dim()
                || pass.pre_activations[k].cols() != layer.out_dim()
            {
                return Err(Error::CacheMismatch(format!(
                    "cache shapes at layer {k} do not match the network"
                )));
            }
        }
        if upstream.shape() != pass.output.shape() {
            return Err(Error::CacheMismatch(format!(
                "upstream gradient is {}x{}, cached output is {}x{}",
                upstream.rows(),
                upstream.cols(),
                pass.output.rows(),
                pass.output.cols()
            )));
        }

        let mut grad = upstream.clone();
        let mut layer_grads = vec![
            ParamGrad {
                weight: Tensor2::zeros(0, 0),
                bias: Tensor2::zeros(0, 0),
            };
            self.layers.len()
        ];
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let z = &pass.pre_activations[k];
            let mut dz = grad;
            for (g, &zv) in dz.data_mut().iter_mut().zip(z.data()) {
                *g *= layer.activation.derivative(zv);
            }
            layer_grads[k] = ParamGrad {
                weight: pass.inputs[k].matmul_transpose_self(&dz)?,
                bias: dz.column_sums(),
            };
            grad = dz.matmul_transpose_other(&layer.weight)?;
        }
        Ok(Gradients {
            layers: layer_grads,
            input: grad,
        })
    }
}

/// Cache produced by [`Network::forward`].
#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub output: Tensor2,
    inputs: Vec<Tensor2>,
    pre_activations: Vec<Tensor2>,
}

impl ForwardPass {
    /// Smallest `|pre-activation|` across all layers. Finite differences
    /// straddle the rectifier kink when this is below the probe step, so
    /// callers can screen for it.
    pub fn min_abs_pre_activation(&self) -> f64 {
        self.pre_activations
            .iter()
            .flat_map(|z| z.data().iter())
            .fold(f64::INFINITY, |acc, &v| acc.min(v.abs()))
    }
}

#[derive(Debug, Clone)]
pub struct ParamGrad {
    pub weight: Tensor2,
    pub bias: Tensor2,
}

/// Per-parameter gradients plus the gradient w.r.t. the batch.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<ParamGrad>,
    pub input: Tensor2,
}

impl Gradients {
    pub fn add_assign(&mut self, other: &Gradients) -> Result<()> {
        if self.layers.len() != other.layers.len() {
            return Err(Error::ShapeMismatch {
                context: "Gradients::add_assign".into(),
                expected: format!("{} layers", self.layers.len()),
                actual: format!("{} layers", other.layers.len()),
            });
        }
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weight.add_assign(&b.weight)?;
            a.bias.add_assign(&b.bias)?;
        }
        self.input.add_assign(&other.input)
    }
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

/// Default learning rate used across the lab's optimizers.
pub const DEFAULT_LEARNING_RATE: f64 = 2e-4;

/// Bias-corrected Adam state; moments mirror the parameter shapes.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub step: u64,
    m: Vec<ParamGrad>,
    v: Vec<ParamGrad>,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(net: &Network, learning_rate: f64, beta1: f64, beta2: f64) -> Self {
        let zeros = |l: &Layer| ParamGrad {
            weight: Tensor2::zeros(l.weight.rows(), l.weight.cols()),
            bias: Tensor2::zeros(1, l.bias.cols()),
        };
        AdamState {
            step: 0,
            m: net.layers().iter().map(zeros).collect(),
            v: net.layers().iter().map(zeros).collect(),
            learning_rate,
            beta1,
            beta2,
            epsilon: 1e-8,
        }
    }

    /// lr 2e-4, beta1 0.9, beta2 0.999.
    pub fn with_defaults(net: &Network) -> Self {
        AdamState::new(net, DEFAULT_LEARNING_RATE, 0.9, 0.999)
    }
}

/// One bias-corrected Adam update in place. Non-finite gradient entries abort
/// with the offending layer.
pub fn adam_step(net: &mut Network, grads: &Gradients, state: &mut AdamState) -> Result<()> {
    if grads.layers.len() != net.layers().len() || state.m.len() != net.layers().len() {
        return Err(Error::ShapeMismatch {
            context: "adam_step".into(),
            expected: format!("{} layers", net.layers().len()),
            actual: format!("{} gradient layers", grads.layers.len()),
        });
    }
    for (k, g) in grads.layers.iter().enumerate() {
        if let Some(i) = g.weight.first_non_finite().or(g.bias.first_non_finite()) {
            return Err(Error::NonFinite {
                context: format!("gradient for layer {k}"),
                index: i,
            });
        }
    }

    state.step += 1;
    let t = state.step as f64;
    let bc1 = 1.0 - state.beta1.powf(t);
    let bc2 = 1.0 - state.beta2.powf(t);

    for (k, layer) in net.layers_mut().iter_mut().enumerate() {
        let update = |param: &mut [f64], grad: &[f64], m: &mut [f64], v: &mut [f64]| {
            for i in 0..param.len() {
                m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * grad[i];
                v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                param[i] -= state.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
            }
        };
        update(
            layer.weight.data_mut(),
            grads.layers[k].weight.data(),
            state.m[k].weight.data_mut(),
            state.v[k].weight.data_mut(),
        );
        update(
            layer.bias.data_mut(),
            grads.layers[k].bias.data(),
            state.m[k].bias.data_mut(),
            state.v[k].bias.data_mut(),
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Finite-difference gradient verification
// ---------------------------------------------------------------------------

/// Compares analytic parameter gradients against central finite differences
/// of `loss` over the whole parameter vector.
///
/// Returns `max |analytic - numeric| / max(1e-8, |analytic| + |numeric|)`.
pub fn gradient_check(
    net: &Network,
    loss: &dyn Loss,
    batch: &Tensor2,
    fd_step: f64,
) -> Result<f64> {
    if !(fd_step > 0.0) {
        return Err(Error::EmptyInput(format!(
            "fd_step = {fd_step} violates fd_step > 0"
        )));
    }
    let pass = net.forward(batch)?;
    let upstream = loss.output_gradient(&pass.output);
    let analytic = net.backward(&pass, &upstream)?;

    let mut probe = net.clone();
    let mut max_rel = 0.0f64;
    for k in 0..net.layers().len() {
        for which in 0..2 {
            let len = if which == 0 {
                net.layers()[k].weight.data().len()
            } else {
                net.layers()[k].bias.data().len()
            };
            for i in 0..len {
                let eval = |p: &mut Network, delta: f64| -> Result<f64> {
                    {
                        let l = &mut p.layers_mut()[k];
                        let slot = if which == 0 {
                            &mut l.weight.data_mut()[i]
                        } else {
                            &mut l.bias.data_mut()[i]
                        };
                        *slot += delta;
                    }
                    let out = p.forward(batch)?.output;
                    Ok(loss.value(&out))
                };
                let plus = eval(&mut probe, fd_step)?;
                let minus = eval(&mut probe, -2.0 * fd_step)?;
                eval(&mut probe, fd_step)?; // restore
                let numeric = (plus - minus) / (2.0 * fd_step);
                let a = if which == 0 {
                    analytic.layers[k].weight.data()[i]
                } else {
                    analytic.layers[k].bias.data()[i]
                };
                let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-8);
                if rel > max_rel {
                    max_rel = rel;
                }
            }
        }
    }
    Ok(max_rel)
}
