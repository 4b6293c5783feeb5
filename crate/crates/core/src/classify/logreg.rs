use serde::Serialize;

use super::mlp::bce_from_logit;
use super::{check_training_data, LabeledVector};
use crate::embedding::objective::sigmoid;
use crate::error::{Error, Result};
use crate::matrix::dot;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogRegConfig {
    pub l2: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig {
            l2: 1e-4,
            epochs: 500,
            learning_rate: 0.5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogReg {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogReg {
    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(dot(&self.weights, x) + self.bias)
    }

    /// Weights followed by the bias.
    pub fn parameters(&self) -> Vec<f64> {
        let mut p = self.weights.clone();
        p.push(self.bias);
        p
    }

    pub fn set_parameters(&mut self, params: &[f64]) {
        let (w, b) = params.split_at(self.weights.len());
        self.weights.copy_from_slice(w);
        self.bias = b[0];
    }
}

/// Mean cross-entropy plus `l2/2 * |w|^2`.
pub fn logreg_loss(model: &LogReg, data: &[LabeledVector], l2: f64) -> f64 {
    let n = data.len().max(1) as f64;
    let ce: f64 = data
        .iter()
        .map(|ex| bce_from_logit(dot(&model.weights, &ex.features) + model.bias, ex.target()))
        .sum();
    ce / n + 0.5 * l2 * dot(&model.weights, &model.weights)
}

pub fn logreg_gradient(model: &LogReg, data: &[LabeledVector], l2: f64) -> (f64, Vec<f64>) {
    let n = data.len().max(1) as f64;
    let mut grad = vec![0.0; model.weights.len() + 1];
    let mut ce = 0.0;
    for ex in data {
        let z = dot(&model.weights, &ex.features) + model.bias;
        let y = ex.target();
        ce += bce_from_logit(z, y);
        let d = (sigmoid(z) - y) / n;
        for (g, x) in grad.iter_mut().zip(&ex.features) {
            *g += d * x;
        }
        *grad.last_mut().expect("bias slot") += d;
    }
    for (g, w) in grad.iter_mut().zip(&model.weights) {
        *g += l2 * w;
    }
    (
        ce / n + 0.5 * l2 * dot(&model.weights, &model.weights),
        grad,
    )
}

/// Full-batch gradient descent from zero weights.
pub fn fit_logreg(data: &[LabeledVector], config: &LogRegConfig) -> Result<LogReg> {
    if config.epochs == 0
        || config.learning_rate.is_nan()
        || config.learning_rate <= 0.0
        || config.l2 < 0.0
    {
        return Err(Error::Config(
            "logreg: epochs >= 1, learning rate > 0 and l2 >= 0 required".into(),
        ));
    }
    let dim = check_training_data(data)?;
    let mut model = LogReg {
        weights: vec![0.0; dim],
        bias: 0.0,
    };
    let mut params = model.parameters();
    for epoch in 0..config.epochs {
        let (loss, grad) = logreg_gradient(&model, data, config.l2);
        if !loss.is_finite() {
            return Err(Error::Numerical(format!(
                "logreg loss is not finite at epoch {epoch}"
            )));
        }
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= config.learning_rate * g;
        }
        model.set_parameters(&params);
    }
    Ok(model)
}
