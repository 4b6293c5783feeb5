//! Paragraph vectors trained from scratch.
//!
//! Two modes share one negative-sampling objective (see [`objective`]):
//! PV-DM predicts each token from the mean of the document vector and the
//! vectors of the tokens within `window` positions on either side; PV-DBOW
//! predicts each token from the document vector alone. Training is plain
//! SGD with a linearly decaying learning rate.

pub mod io;
pub mod objective;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};
use objective::{sgd_step, Example, ParamStore, Params, Scratch, Table};

/// Token ↔ index map with corpus counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    index: HashMap<String, usize>,
    tokens: Vec<String>,
    counts: Vec<u64>,
    min_count: usize,
}

impl Vocab {
    /// Tokens sorted by descending count, ties lexicographic.
    fn from_counts(counts: HashMap<&str, u64>, min_count: usize) -> Result<Self> {
        let mut kept: Vec<(&str, u64)> = counts
            .into_iter()
            .filter(|&(_, c)| c >= min_count as u64)
            .collect();
        if kept.is_empty() {
            return Err(Error::Data(format!(
                "vocabulary is empty at min_count {min_count}"
            )));
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        Ok(Self::from_entries(
            kept.into_iter().map(|(t, c)| (t.to_string(), c)).collect(),
            min_count,
        ))
    }

    pub(crate) fn from_entries(entries: Vec<(String, u64)>, min_count: usize) -> Self {
        let mut index = HashMap::with_capacity(entries.len());
        let mut tokens = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        for (i, (t, c)) in entries.into_iter().enumerate() {
            index.insert(t.clone(), i);
            tokens.push(t);
            counts.push(c);
        }
        Vocab {
            index,
            tokens,
            counts,
            min_count,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, i: usize) -> &str {
        &self.tokens[i]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn count(&self, i: usize) -> u64 {
        self.counts[i]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }
}

/// Index every token whose corpus frequency reaches `min_count`.
pub fn build_vocab<S: AsRef<[String]>>(streams: &[S], min_count: usize) -> Result<Vocab> {
    if streams.is_empty() {
        return Err(Error::Data(
            "no token streams to build a vocabulary from".into(),
        ));
    }
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for s in streams {
        for t in s.as_ref() {
            *counts.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    Vocab::from_counts(counts, min_count)
}

/// Positions within `k` of `i` on either side, excluding `i`, clipped to
/// `0..len`.
pub fn context_window(len: usize, i: usize, k: usize) -> Vec<usize> {
    let lo = i.saturating_sub(k);
    let hi = (i + k + 1).min(len);
    (lo..hi).filter(|&j| j != i).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedMode {
    #[default]
    Pvdm,
    Pvdbow,
}

impl FromStr for EmbedMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pvdm" => Ok(EmbedMode::Pvdm),
            "pvdbow" => Ok(EmbedMode::Pvdbow),
            other => Err(Error::Config(format!("unknown embedding mode `{other}`"))),
        }
    }
}

impl fmt::Display for EmbedMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmbedMode::Pvdm => "pvdm",
            EmbedMode::Pvdbow => "pvdbow",
        })
    }
}

/// Embedding hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbedHyper {
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub negative: usize,
    pub min_count: usize,
    pub mode: EmbedMode,
    pub seed: u64,
    /// 1 trains deterministically; more threads update shared parameters
    /// without locking and give non-reproducible results.
    pub threads: usize,
}

impl Default for EmbedHyper {
    fn default() -> Self {
        EmbedHyper {
            dim: 600,
            window: 2,
            epochs: 20,
            lr_start: 0.025,
            lr_end: 0.0001,
            negative: 5,
            min_count: 2,
            mode: EmbedMode::Pvdm,
            seed: 0,
            threads: 1,
        }
    }
}

impl EmbedHyper {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(format!("embedding: {m}")));
        if self.dim == 0 {
            return fail("dim must be positive");
        }
        if self.window == 0 {
            return fail("window must be at least 1");
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1");
        }
        if !(self.lr_end > 0.0 && self.lr_end <= self.lr_start && self.lr_start.is_finite()) {
            return fail("learning rates must satisfy 0 < lr_end <= lr_start");
        }
        if self.threads == 0 {
            return fail("threads must be at least 1");
        }
        Ok(())
    }
}

/// Noise distribution for negative sampling: unigram counts raised to 0.75.
#[derive(Debug, Clone)]
pub struct NoiseDistribution {
    probabilities: Vec<f64>,
    index: WeightedIndex<f64>,
}

impl NoiseDistribution {
    pub const POWER: f64 = 0.75;

    pub fn new(counts: &[u64]) -> Result<Self> {
        let weights: Vec<f64> = counts
            .iter()
            .map(|&c| (c as f64).powf(Self::POWER))
            .collect();
        let total: f64 = weights.iter().sum();
        let index = WeightedIndex::new(&weights)
            .map_err(|e| Error::Data(format!("noise distribution: {e}")))?;
        Ok(NoiseDistribution {
            probabilities: weights.iter().map(|w| w / total).collect(),
            index,
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.index.sample(rng)
    }
}

/// A trained paragraph-vector model.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub(crate) params: Params,
    pub(crate) vocab: Vocab,
    pub(crate) hyper: EmbedHyper,
    pub(crate) doc_ids: Vec<String>,
    pub(crate) doc_index: HashMap<String, usize>,
    /// Mean example loss per epoch. Not persisted in model files.
    pub(crate) epoch_losses: Vec<f64>,
}

impl EmbeddingModel {
    pub(crate) fn assemble(
        params: Params,
        vocab: Vocab,
        hyper: EmbedHyper,
        doc_ids: Vec<String>,
        epoch_losses: Vec<f64>,
    ) -> Result<Self> {
        let doc_index: HashMap<String, usize> = doc_ids
            .iter()
            .enumerate()
            .map(|(i, d)| (d.clone(), i))
            .collect();
        if doc_index.len() != doc_ids.len() {
            return Err(Error::Data(
                "duplicate document id in embedding input".into(),
            ));
        }
        let dim = hyper.dim;
        let shapes_ok = params.docs.rows() == doc_ids.len()
            && params.words.rows() == vocab.len()
            && params.outs.rows() == vocab.len()
            && [&params.docs, &params.words, &params.outs]
                .iter()
                .all(|m| m.cols() == dim);
        if !shapes_ok {
            return Err(Error::Data(
                "embedding parameter shapes are inconsistent".into(),
            ));
        }
        Ok(EmbeddingModel {
            params,
            vocab,
            hyper,
            doc_ids,
            doc_index,
            epoch_losses,
        })
    }

    pub fn dim(&self) -> usize {
        self.hyper.dim
    }

    pub fn hyper(&self) -> &EmbedHyper {
        &self.hyper
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn doc_vectors(&self) -> &Matrix {
        &self.params.docs
    }

    pub fn word_vectors(&self) -> &Matrix {
        &self.params.words
    }

    pub fn out_weights(&self) -> &Matrix {
        &self.params.outs
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn doc_vector(&self, doc_id: &str) -> Option<&[f64]> {
        self.doc_index.get(doc_id).map(|&i| self.params.docs.row(i))
    }

    pub fn word_vector(&self, token: &str) -> Option<&[f64]> {
        self.vocab.get(token).map(|i| self.params.words.row(i))
    }

    pub fn epoch_losses(&self) -> &[f64] {
        &self.epoch_losses
    }
}

fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, dim: usize) -> Matrix {
    let bound = 0.5 / dim as f64;
    Matrix::from_vec(
        rows,
        dim,
        (0..rows * dim)
            .map(|_| rng.gen_range(-bound..bound))
            .collect(),
    )
}

/// Token stream encoded against a vocabulary; `None` marks OOV tokens.
fn encode(vocab: &Vocab, tokens: &[String]) -> Vec<Option<usize>> {
    tokens.iter().map(|t| vocab.get(t)).collect()
}

struct Schedule {
    lr_start: f64,
    lr_end: f64,
    total: usize,
}

impl Schedule {
    fn lr(&self, step: usize) -> f64 {
        let progress = (step as f64 / self.total.max(1) as f64).min(1.0);
        self.lr_start - (self.lr_start - self.lr_end) * progress
    }
}

struct DocPass<'a> {
    hyper: &'a EmbedHyper,
    noise: &'a NoiseDistribution,
    vocab: &'a Vocab,
}

impl DocPass<'_> {
    /// Train on every in-vocabulary position of one document. `next_step`
    /// yields the global step for the learning-rate schedule.
    #[allow(clippy::too_many_arguments)]
    fn run<P: ParamStore + ?Sized>(
        &self,
        params: &mut P,
        doc: usize,
        stream: &[Option<usize>],
        schedule: &Schedule,
        rng: &mut ChaCha8Rng,
        scratch: &mut Scratch,
        mut next_step: impl FnMut() -> usize,
    ) -> Result<(f64, usize)> {
        let mut contexts = Vec::with_capacity(2 * self.hyper.window);
        let mut negatives = Vec::with_capacity(self.hyper.negative);
        let mut loss_sum = 0.0;
        let mut examples = 0;
        for (i, target) in stream.iter().enumerate() {
            let Some(target) = *target else { continue };
            contexts.clear();
            if self.hyper.mode == EmbedMode::Pvdm {
                contexts.extend(
                    context_window(stream.len(), i, self.hyper.window)
                        .into_iter()
                        .filter_map(|j| stream[j]),
                );
            }
            negatives.clear();
            for _ in 0..self.hyper.negative {
                let n = self.noise.sample(rng);
                if n != target {
                    negatives.push(n);
                }
            }
            let step = next_step();
            let ex = Example {
                doc,
                contexts: &contexts,
                target,
                negatives: &negatives,
            };
            let loss = sgd_step(params, &ex, self.hyper.mode, schedule.lr(step), scratch);
            if !loss.is_finite() {
                return Err(Error::Numerical(format!(
                    "non-finite loss at step {step}, token `{}`",
                    self.vocab.token(target)
                )));
            }
            loss_sum += loss;
            examples += 1;
        }
        Ok((loss_sum, examples))
    }
}

/// Train document and word vectors over `(doc_id, tokens)` streams.
pub fn train(docs: &[(String, Vec<String>)], hyper: &EmbedHyper) -> Result<EmbeddingModel> {
    hyper.validate()?;
    let streams: Vec<&[String]> = docs.iter().map(|(_, t)| t.as_slice()).collect();
    let vocab = build_vocab(&streams, hyper.min_count)?;
    let encoded: Vec<Vec<Option<usize>>> = streams.iter().map(|s| encode(&vocab, s)).collect();
    let noise = NoiseDistribution::new(vocab.counts())?;

    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut params = Params {
        docs: uniform_matrix(&mut rng, docs.len(), hyper.dim),
        words: uniform_matrix(&mut rng, vocab.len(), hyper.dim),
        outs: uniform_matrix(&mut rng, vocab.len(), hyper.dim),
    };
    let per_epoch: usize = encoded.iter().map(|s| s.iter().flatten().count()).sum();
    let schedule = Schedule {
        lr_start: hyper.lr_start,
        lr_end: hyper.lr_end,
        total: per_epoch * hyper.epochs,
    };
    let pass = DocPass {
        hyper,
        noise: &noise,
        vocab: &vocab,
    };

    let epoch_losses = if hyper.threads <= 1 {
        let mut scratch = Scratch::new(hyper.dim);
        let mut order: Vec<usize> = (0..docs.len()).collect();
        let mut step = 0;
        let mut losses = Vec::with_capacity(hyper.epochs);
        for _ in 0..hyper.epochs {
            order.shuffle(&mut rng);
            let (mut sum, mut n) = (0.0, 0);
            for &d in &order {
                let (l, k) = pass.run(
                    &mut params,
                    d,
                    &encoded[d],
                    &schedule,
                    &mut rng,
                    &mut scratch,
                    || {
                        step += 1;
                        step - 1
                    },
                )?;
                sum += l;
                n += k;
            }
            losses.push(sum / n.max(1) as f64);
        }
        losses
    } else {
        train_shared(&mut params, &encoded, &pass, &schedule, &mut rng)?
    };

    let doc_ids = docs.iter().map(|(id, _)| id.clone()).collect();
    let model = EmbeddingModel::assemble(params, vocab, hyper.clone(), doc_ids, epoch_losses)?;
    if !(model.params.docs.is_finite()
        && model.params.words.is_finite()
        && model.params.outs.is_finite())
    {
        return Err(Error::Numerical(
            "embedding parameters became non-finite".into(),
        ));
    }
    Ok(model)
}

struct AtomicTable {
    cols: usize,
    data: Vec<AtomicU64>,
}

impl AtomicTable {
    fn from_matrix(m: &Matrix) -> Self {
        AtomicTable {
            cols: m.cols(),
            data: m
                .as_slice()
                .iter()
                .map(|x| AtomicU64::new(x.to_bits()))
                .collect(),
        }
    }

    fn write_back(&self, m: &mut Matrix) {
        for (dst, src) in m.as_mut_slice().iter_mut().zip(&self.data) {
            *dst = f64::from_bits(src.load(Ordering::Relaxed));
        }
    }
}

struct SharedParams {
    tables: [AtomicTable; 3],
}

/// Lock-free view used by worker threads. Concurrent updates of the same
/// row may overwrite each other.
struct SharedView<'a>(&'a SharedParams);

impl SharedView<'_> {
    fn table(&self, t: Table) -> &AtomicTable {
        &self.0.tables[t as usize]
    }
}

impl ParamStore for SharedView<'_> {
    fn dim(&self) -> usize {
        self.0.tables[0].cols
    }

    fn read(&self, table: Table, row: usize, out: &mut [f64]) {
        let t = self.table(table);
        let cells = &t.data[row * t.cols..(row + 1) * t.cols];
        for (o, c) in out.iter_mut().zip(cells) {
            *o = f64::from_bits(c.load(Ordering::Relaxed));
        }
    }

    fn add(&mut self, table: Table, row: usize, scale: f64, delta: &[f64]) {
        let t = self.table(table);
        let cells = &t.data[row * t.cols..(row + 1) * t.cols];
        for (c, d) in cells.iter().zip(delta) {
            let cur = f64::from_bits(c.load(Ordering::Relaxed));
            c.store((cur + scale * d).to_bits(), Ordering::Relaxed);
        }
    }
}

fn train_shared(
    params: &mut Params,
    encoded: &[Vec<Option<usize>>],
    pass: &DocPass<'_>,
    schedule: &Schedule,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let threads = pass.hyper.threads;
    let shared = SharedParams {
        tables: [
            AtomicTable::from_matrix(&params.docs),
            AtomicTable::from_matrix(&params.words),
            AtomicTable::from_matrix(&params.outs),
        ],
    };
    let step = AtomicUsize::new(0);
    let mut order: Vec<usize> = (0..encoded.len()).collect();
    let mut losses = Vec::with_capacity(pass.hyper.epochs);
    for _ in 0..pass.hyper.epochs {
        order.shuffle(rng);
        let chunk = order.len().div_ceil(threads).max(1);
        let seeds: Vec<u64> = (0..threads).map(|_| rng.gen()).collect();
        let results: Vec<Result<(f64, usize)>> = std::thread::scope(|scope| {
            let handles: Vec<_> = order
                .chunks(chunk)
                .zip(&seeds)
                .map(|(docs, &seed)| {
                    let shared = &shared;
                    let step = &step;
                    scope.spawn(move || {
                        let mut view = SharedView(shared);
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        let mut scratch = Scratch::new(pass.hyper.dim);
                        let (mut sum, mut n) = (0.0, 0);
                        for &d in docs {
                            let (l, k) = pass.run(
                                &mut view,
                                d,
                                &encoded[d],
                                schedule,
                                &mut rng,
                                &mut scratch,
                                || step.fetch_add(1, Ordering::Relaxed),
                            )?;
                            sum += l;
                            n += k;
                        }
                        Ok((sum, n))
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("embedding worker panicked"))
                .collect()
        });
        let (mut sum, mut n) = (0.0, 0);
        for r in results {
            let (l, k) = r?;
            sum += l;
            n += k;
        }
        losses.push(sum / n.max(1) as f64);
    }
    shared.tables[0].write_back(&mut params.docs);
    shared.tables[1].write_back(&mut params.words);
    shared.tables[2].write_back(&mut params.outs);
    Ok(losses)
}

/// Parameters of a trained model with a single trainable document vector.
struct InferStore<'a> {
    model: &'a EmbeddingModel,
    doc: Vec<f64>,
}

impl ParamStore for InferStore<'_> {
    fn dim(&self) -> usize {
        self.doc.len()
    }

    fn read(&self, table: Table, row: usize, out: &mut [f64]) {
        match table {
            Table::Doc => out.copy_from_slice(&self.doc),
            Table::Word => out.copy_from_slice(self.model.params.words.row(row)),
            Table::Out => out.copy_from_slice(self.model.params.outs.row(row)),
        }
    }

    fn add(&mut self, table: Table, _row: usize, scale: f64, delta: &[f64]) {
        if table == Table::Doc {
            crate::matrix::axpy(scale, delta, &mut self.doc);
        }
    }
}

/// Result of [`infer_vector`].
#[derive(Debug, Clone, PartialEq)]
pub struct Inferred {
    pub vector: Vec<f64>,
    /// Set when no token was in the vocabulary; the vector is then zero.
    pub all_oov: bool,
}

/// Fit a vector for an unseen token stream with word and output weights
/// frozen. `steps` passes over the stream, learning rate decaying linearly
/// from `lr` to the model's final rate.
pub fn infer_vector(
    model: &EmbeddingModel,
    tokens: &[String],
    steps: usize,
    lr: f64,
    seed: u64,
) -> Result<Inferred> {
    let dim = model.dim();
    let encoded = encode(&model.vocab, tokens);
    let positions = encoded.iter().flatten().count();
    if positions == 0 {
        return Ok(Inferred {
            vector: vec![0.0; dim],
            all_oov: true,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = 0.5 / dim as f64;
    let mut store = InferStore {
        model,
        doc: (0..dim).map(|_| rng.gen_range(-bound..bound)).collect(),
    };
    let noise = NoiseDistribution::new(model.vocab.counts())?;
    let schedule = Schedule {
        lr_start: lr,
        lr_end: model.hyper.lr_end.min(lr),
        total: positions * steps,
    };
    let pass = DocPass {
        hyper: &model.hyper,
        noise: &noise,
        vocab: &model.vocab,
    };
    let mut scratch = Scratch::new(dim);
    let mut step = 0;
    for _ in 0..steps {
        pass.run(
            &mut store,
            0,
            &encoded,
            &schedule,
            &mut rng,
            &mut scratch,
            || {
                step += 1;
                step - 1
            },
        )?;
    }
    Ok(Inferred {
        vector: store.doc,
        all_oov: false,
    })
}

/// `1 - cos(u, v)`, in `[0, 2]`.
pub fn cosine_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Dimension {
            expected: u.len(),
            actual: v.len(),
        });
    }
    let (uu, vv) = (dot(u, u), dot(v, v));
    if uu == 0.0 || vv == 0.0 {
        return Err(Error::Numerical("cosine distance of a zero vector".into()));
    }
    Ok((1.0 - dot(u, v) / (uu * vv).sqrt()).clamp(0.0, 2.0))
}
