//! Stratified cross-validation, metrics, reports and synthetic corpora.
//!
//! The positive class is always the hateful one. Precision, recall and
//! F-measure follow the convention that any 0/0 ratio is 0.

mod cv;
mod report;
mod synth;

pub use cv::{
    cross_validate, Access, CorpusSource, DocumentSource, EvalMode, LexiconSource, Pipeline,
    PipelineConfig, Representation,
};
pub use report::{
    render_report, report_json, EvalReport, FoldResult, Metrics, PipelineDescriptor, ReportFormat,
    REPORT_SCHEMA_VERSION,
};
pub use synth::{generate_synthetic, SyntheticCorpus, SyntheticSpec, ACTION_VERBS, NEUTRAL_VERBS};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{Dataset, Label};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn record(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::Hateful, Label::Hateful) => self.tp += 1,
            (Label::NonHateful, Label::Hateful) => self.fp += 1,
            (Label::NonHateful, Label::NonHateful) => self.tn += 1,
            (Label::Hateful, Label::NonHateful) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// The same counts with the classes swapped.
    pub fn flipped(&self) -> Confusion {
        Confusion {
            tp: self.tn,
            fp: self.fn_,
            tn: self.tp,
            fn_: self.fp,
        }
    }
}

impl std::ops::AddAssign for Confusion {
    fn add_assign(&mut self, o: Confusion) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.tn += o.tn;
        self.fn_ += o.fn_;
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Harmonic mean of precision and recall, 0 when both are 0.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    ratio(2.0 * precision * recall, precision + recall)
}

/// `(precision, recall, F)` for the hateful class.
pub fn prf(c: &Confusion) -> (f64, f64, f64) {
    let p = ratio(c.tp as f64, (c.tp + c.fp) as f64);
    let r = ratio(c.tp as f64, (c.tp + c.fn_) as f64);
    (p, r, f_measure(p, r))
}

/// Split indices into `k` folds, keeping each class's share per fold within
/// one of its proportional value. Fold contents are sorted ascending.
pub fn stratified_folds(labels: &[Label], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut offset = 0;
    for class in [Label::NonHateful, Label::Hateful] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.is_empty() {
            continue;
        }
        if idx.len() < k {
            return Err(Error::Data(format!(
                "class {} has {} documents, fewer than {k} folds",
                class.as_u8(),
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for (j, i) in idx.iter().enumerate() {
            folds[(offset + j) % k].push(*i);
        }
        offset = (offset + idx.len()) % k;
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

pub fn stratified_kfold(dataset: &Dataset, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    stratified_folds(&dataset.labels()?, k, seed)
}

/// Deterministic per-component seed derived from a run's root seed.
pub fn derive_seed(root: u64, component: &str, index: u64) -> u64 {
    // SplitMix64 finalizer over a mix of the inputs.
    let mut z = root ^ 0x9e37_79b9_7f4a_7c15;
    for b in component.bytes().chain(index.to_le_bytes()) {
        z = (z ^ u64::from(b)).wrapping_mul(0x1000_0000_01b3);
    }
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
