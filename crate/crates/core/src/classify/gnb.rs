use serde::Serialize;

use super::{check_training_data, LabeledVector};
use crate::corpus::Label;
use crate::embedding::objective::sigmoid;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GnbConfig {
    pub var_floor: f64,
}

impl Default for GnbConfig {
    fn default() -> Self {
        GnbConfig { var_floor: 1e-9 }
    }
}

/// Gaussian naive Bayes. Index 0 holds the non-hateful class.
#[derive(Debug, Clone, PartialEq)]
pub struct Gnb {
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
    pub log_priors: [f64; 2],
}

impl Gnb {
    /// `ln P(class) + Σ_j ln N(x_j; mean, var)`
    pub fn log_joint(&self, class: usize, x: &[f64]) -> f64 {
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        self.log_priors[class]
            + x.iter()
                .zip(&self.means[class])
                .zip(&self.variances[class])
                .map(|((x, m), v)| -0.5 * (ln_2pi + v.ln() + (x - m) * (x - m) / v))
                .sum::<f64>()
    }

    /// Posterior of both classes, `[P(0|x), P(1|x)]`.
    pub fn posterior(&self, x: &[f64]) -> [f64; 2] {
        let diff = self.log_joint(1, x) - self.log_joint(0, x);
        [sigmoid(-diff), sigmoid(diff)]
    }
}

pub fn fit_gnb(data: &[LabeledVector], config: &GnbConfig) -> Result<Gnb> {
    let dim = check_training_data(data)?;
    let mut means = [vec![0.0; dim], vec![0.0; dim]];
    let mut variances = [vec![0.0; dim], vec![0.0; dim]];
    let mut counts = [0usize; 2];
    for ex in data {
        let c = ex.label.as_u8() as usize;
        counts[c] += 1;
        for (m, x) in means[c].iter_mut().zip(&ex.features) {
            *m += x;
        }
    }
    for c in 0..2 {
        means[c].iter_mut().for_each(|m| *m /= counts[c] as f64);
    }
    for ex in data {
        let c = ex.label.as_u8() as usize;
        for ((v, x), m) in variances[c].iter_mut().zip(&ex.features).zip(&means[c]) {
            *v += (x - m) * (x - m);
        }
    }
    for c in 0..2 {
        variances[c]
            .iter_mut()
            .for_each(|v| *v = (*v / counts[c] as f64).max(config.var_floor));
    }
    let n = data.len() as f64;
    let log_priors = [
        (counts[Label::NonHateful.as_u8() as usize] as f64 / n).ln(),
        (counts[Label::Hateful.as_u8() as usize] as f64 / n).ln(),
    ];
    Ok(Gnb {
        means,
        variances,
        log_priors,
    })
}
