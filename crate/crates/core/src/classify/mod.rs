//! Classifiers over document vectors and the bag-of-n-grams baseline
//! featurizer.
//!
//! Every classifier outputs the probability of the hateful class. A document
//! is labelled hateful when that probability is **at least** the model's
//! threshold, so an exact 0.5 goes to the hateful class.

mod bow;
mod gnb;
pub mod io;
mod logreg;
mod mlp;

pub use bow::{bow_features, load_terms, BowConfig, BowFeaturizer, BowMatrix};
pub use gnb::{fit_gnb, Gnb, GnbConfig};
pub use logreg::{fit_logreg, logreg_gradient, logreg_loss, LogReg, LogRegConfig};
pub use mlp::{fit_mlp, mlp_gradient, mlp_loss, Activation, Dense, Mlp, MlpConfig};

use crate::corpus::Label;
use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledVector {
    pub features: Vec<f64>,
    pub label: Label,
}

impl LabeledVector {
    pub fn new(features: Vec<f64>, label: Label) -> Self {
        LabeledVector { features, label }
    }

    pub(crate) fn target(&self) -> f64 {
        f64::from(self.label.as_u8())
    }
}

/// Returns the shared dimension after checking shape, finiteness and that
/// both classes are present.
pub(crate) fn check_training_data(data: &[LabeledVector]) -> Result<usize> {
    let dim = data
        .first()
        .map(|ex| ex.features.len())
        .ok_or_else(|| Error::Data("no training examples".into()))?;
    let mut seen = [false; 2];
    for (i, ex) in data.iter().enumerate() {
        if ex.features.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                actual: ex.features.len(),
            });
        }
        if ex.features.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical(format!(
                "example {i} has a non-finite feature"
            )));
        }
        seen[ex.label.as_u8() as usize] = true;
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::Data(
            "training data must contain both hateful and non-hateful examples".into(),
        ));
    }
    Ok(dim)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    Mlp(Mlp),
    LogReg(LogReg),
    Gnb(Gnb),
}

impl Classifier {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            Classifier::Mlp(_) => ClassifierKind::Mlp,
            Classifier::LogReg(_) => ClassifierKind::LogReg,
            Classifier::Gnb(_) => ClassifierKind::Gnb,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Mlp,
    LogReg,
    Gnb,
}

impl ClassifierKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Mlp => "mlp",
            ClassifierKind::LogReg => "logreg",
            ClassifierKind::Gnb => "gnb",
        }
    }
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mlp" => Ok(ClassifierKind::Mlp),
            "logreg" | "lr" => Ok(ClassifierKind::LogReg),
            "gnb" | "nb" => Ok(ClassifierKind::Gnb),
            _ => Err(Error::Config(format!(
                "unknown classifier {s:?} (expected mlp, logreg or gnb)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    pub classifier: Classifier,
    pub dim: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub probability: f64,
    pub label: Label,
}

/// The decision rule: hateful iff `probability >= threshold`.
pub fn decide(probability: f64, threshold: f64) -> Label {
    if probability >= threshold {
        Label::Hateful
    } else {
        Label::NonHateful
    }
}

impl ClassifierModel {
    pub fn new(classifier: Classifier, dim: usize) -> Self {
        ClassifierModel {
            classifier,
            dim,
            threshold: DEFAULT_THRESHOLD,
        }
    }

    pub fn kind(&self) -> ClassifierKind {
        self.classifier.kind()
    }

    pub fn predict(&self, features: &[f64]) -> Result<Prediction> {
        if features.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                actual: features.len(),
            });
        }
        let p = match &self.classifier {
            Classifier::Mlp(m) => m.probability(features),
            Classifier::LogReg(m) => m.probability(features),
            Classifier::Gnb(m) => m.posterior(features)[1],
        };
        if !p.is_finite() {
            return Err(Error::Numerical(
                "classifier produced a non-finite probability".into(),
            ));
        }
        let probability = p.clamp(0.0, 1.0);
        Ok(Prediction {
            probability,
            label: decide(probability, self.threshold),
        })
    }
}

pub fn predict(model: &ClassifierModel, features: &[f64]) -> Result<Prediction> {
    model.predict(features)
}

pub fn train_mlp(data: &[LabeledVector], config: &MlpConfig) -> Result<ClassifierModel> {
    let mlp = fit_mlp(data, config)?;
    Ok(ClassifierModel::new(
        Classifier::Mlp(mlp),
        data[0].features.len(),
    ))
}

pub fn train_logreg(data: &[LabeledVector], config: &LogRegConfig) -> Result<ClassifierModel> {
    let lr = fit_logreg(data, config)?;
    Ok(ClassifierModel::new(
        Classifier::LogReg(lr),
        data[0].features.len(),
    ))
}

pub fn train_gnb(data: &[LabeledVector], config: &GnbConfig) -> Result<ClassifierModel> {
    let gnb = fit_gnb(data, config)?;
    Ok(ClassifierModel::new(
        Classifier::Gnb(gnb),
        data[0].features.len(),
    ))
}

/// Training settings for whichever classifier a pipeline uses.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierConfig {
    Mlp(MlpConfig),
    LogReg(LogRegConfig),
    Gnb(GnbConfig),
}

impl ClassifierConfig {
    pub fn default_for(kind: ClassifierKind) -> Self {
        match kind {
            ClassifierKind::Mlp => ClassifierConfig::Mlp(MlpConfig::default()),
            ClassifierKind::LogReg => ClassifierConfig::LogReg(LogRegConfig::default()),
            ClassifierKind::Gnb => ClassifierConfig::Gnb(GnbConfig::default()),
        }
    }

    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierConfig::Mlp(_) => ClassifierKind::Mlp,
            ClassifierConfig::LogReg(_) => ClassifierKind::LogReg,
            ClassifierConfig::Gnb(_) => ClassifierKind::Gnb,
        }
    }

    /// Copy with the seed replaced (no-op for naive Bayes).
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut out = self.clone();
        match &mut out {
            ClassifierConfig::Mlp(c) => c.seed = seed,
            ClassifierConfig::LogReg(c) => c.seed = seed,
            ClassifierConfig::Gnb(_) => {}
        }
        out
    }

    pub fn train(&self, data: &[LabeledVector]) -> Result<ClassifierModel> {
        match self {
            ClassifierConfig::Mlp(c) => train_mlp(data, c),
            ClassifierConfig::LogReg(c) => train_logreg(data, c),
            ClassifierConfig::Gnb(c) => train_gnb(data, c),
        }
    }
}

/// Per-feature z-scoring fitted on training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    /// Constant features get scale 1 so they map to zero.
    pub fn fit<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        let n = rows.len().max(1) as f64;
        let mut means = vec![0.0; dim];
        for r in rows {
            for (m, x) in means.iter_mut().zip(r.as_ref()) {
                *m += x / n;
            }
        }
        let mut vars = vec![0.0; dim];
        for r in rows {
            for ((v, x), m) in vars.iter_mut().zip(r.as_ref()).zip(&means) {
                *v += (x - m) * (x - m) / n;
            }
        }
        let scales = vars
            .into_iter()
            .map(|v| if v > 1e-24 { v.sqrt() } else { 1.0 })
            .collect();
        Standardizer { means, scales }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.means)
            .zip(&self.scales)
            .map(|((x, m), s)| (x - m) / s)
            .collect()
    }
}
