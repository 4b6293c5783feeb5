//! Feed-forward network with full-batch gradient descent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{check_training_data, LabeledVector};
use crate::embedding::objective::{log_sigmoid, sigmoid};
use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
    Logistic,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Logistic => sigmoid(x),
        }
    }

    /// Derivative expressed through the activation's output.
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Logistic => a * (1.0 - a),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MlpConfig {
    pub hidden_layers: usize,
    pub hidden_units: usize,
    /// Full-batch gradient steps.
    pub epochs: usize,
    pub activation: Activation,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden_layers: 2,
            hidden_units: 5,
            epochs: 200,
            activation: Activation::Tanh,
            learning_rate: 0.05,
            seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_layers == 0 || self.hidden_units == 0 || self.epochs == 0 {
            return Err(Error::Config(
                "mlp: layers, units and epochs must all be at least 1".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("mlp: learning rate must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// `outputs x inputs`
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl Dense {
    fn forward(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.weights
                .iter_rows()
                .zip(&self.bias)
                .map(|(w, b)| dot(w, input) + b),
        );
    }
}

/// Hidden layers with a shared activation and a single sigmoid output unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
    pub activation: Activation,
}

impl Mlp {
    /// Xavier-uniform weights, zero biases.
    pub fn init(input_dim: usize, config: &MlpConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut sizes = vec![input_dim];
        sizes.extend(std::iter::repeat_n(
            config.hidden_units,
            config.hidden_layers,
        ));
        sizes.push(1);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (n_in, n_out) = (w[0], w[1]);
                let bound = (6.0 / (n_in + n_out) as f64).sqrt();
                Dense {
                    weights: Matrix::from_vec(
                        n_out,
                        n_in,
                        (0..n_in * n_out)
                            .map(|_| rng.gen_range(-bound..bound))
                            .collect(),
                    ),
                    bias: vec![0.0; n_out],
                }
            })
            .collect();
        Mlp {
            layers,
            activation: config.activation,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weights.cols()
    }

    /// Activations of every layer; the last entry holds the output logit.
    fn forward_all(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::new();
            layer.forward(&acts[l], &mut out);
            if l < last {
                out.iter_mut().for_each(|v| *v = self.activation.apply(*v));
            }
            acts.push(out);
        }
        acts
    }

    pub fn logit(&self, x: &[f64]) -> f64 {
        self.forward_all(x).last().expect("output layer")[0]
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }

    /// All weights and biases, layer by layer (weights row-major, then bias).
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for layer in &self.layers {
            out.extend_from_slice(layer.weights.as_slice());
            out.extend_from_slice(&layer.bias);
        }
        out
    }

    pub fn set_parameters(&mut self, params: &[f64]) {
        let mut offset = 0;
        for layer in &mut self.layers {
            let w = layer.weights.as_mut_slice();
            w.copy_from_slice(&params[offset..offset + w.len()]);
            offset += w.len();
            let n = layer.bias.len();
            layer.bias.copy_from_slice(&params[offset..offset + n]);
            offset += n;
        }
        assert_eq!(offset, params.len(), "parameter vector length");
    }
}

/// Binary cross-entropy of a logit `z` against target `y`.
pub(crate) fn bce_from_logit(z: f64, y: f64) -> f64 {
    -(y * log_sigmoid(z) + (1.0 - y) * log_sigmoid(-z))
}

/// Mean binary cross-entropy over `data`, forward pass only.
pub fn mlp_loss(mlp: &Mlp, data: &[LabeledVector]) -> f64 {
    let n = data.len().max(1) as f64;
    data.iter()
        .map(|ex| bce_from_logit(mlp.logit(&ex.features), ex.target()))
        .sum::<f64>()
        / n
}

/// Mean loss and its gradient by backpropagation, ordered like
/// [`Mlp::parameters`].
pub fn mlp_gradient(mlp: &Mlp, data: &[LabeledVector]) -> (f64, Vec<f64>) {
    let n = data.len().max(1) as f64;
    let mut grads: Vec<Dense> = mlp
        .layers
        .iter()
        .map(|l| Dense {
            weights: Matrix::zeros(l.weights.rows(), l.weights.cols()),
            bias: vec![0.0; l.bias.len()],
        })
        .collect();
    let mut loss = 0.0;
    for ex in data {
        let acts = mlp.forward_all(&ex.features);
        let z = acts.last().expect("output")[0];
        let y = ex.target();
        loss += bce_from_logit(z, y);
        let mut delta = vec![(sigmoid(z) - y) / n];
        for l in (0..mlp.layers.len()).rev() {
            let input = &acts[l];
            let g = &mut grads[l];
            for (o, &d) in delta.iter().enumerate() {
                g.bias[o] += d;
                for (gw, &a) in g.weights.row_mut(o).iter_mut().zip(input) {
                    *gw += d * a;
                }
            }
            if l > 0 {
                let w = &mlp.layers[l].weights;
                delta = (0..w.cols())
                    .map(|j| {
                        let back: f64 =
                            delta.iter().enumerate().map(|(o, d)| d * w.get(o, j)).sum();
                        back * mlp.activation.derivative_from_output(input[j])
                    })
                    .collect();
            }
        }
    }
    let flat = Mlp {
        layers: grads,
        activation: mlp.activation,
    }
    .parameters();
    (loss / n, flat)
}

/// Fit an MLP by `config.epochs` full-batch gradient steps.
pub fn fit_mlp(data: &[LabeledVector], config: &MlpConfig) -> Result<Mlp> {
    config.validate()?;
    let dim = check_training_data(data)?;
    let mut mlp = Mlp::init(dim, config);
    let mut params = mlp.parameters();
    for epoch in 0..config.epochs {
        let (loss, grad) = mlp_gradient(&mlp, data);
        if !loss.is_finite() {
            return Err(Error::Numerical(format!(
                "mlp loss is not finite at epoch {epoch}"
            )));
        }
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= config.learning_rate * g;
        }
        mlp.set_parameters(&params);
    }
    Ok(mlp)
}
