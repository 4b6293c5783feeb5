use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::report::{EvalReport, FoldResult, PipelineDescriptor};
use super::{derive_seed, stratified_folds, Confusion};
use crate::classify::{
    BowConfig, BowFeaturizer, ClassifierConfig, ClassifierKind, LabeledVector, Standardizer,
};
use crate::corpus::{Dataset, Document, Label, PronounConfig};
use crate::embedding::{infer_vector, train, EmbedHyper, EmbedMode};
use crate::error::{Error, Result};
use crate::lexicon::{augment, build_lexicon, AugmentOptions, LexiconConfig, OtheringLexicon};
use crate::parse::{filter_dependencies_with, ParseGraph, ParseMap};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// Embeddings learned once over every document, as in the original
    /// protocol.
    #[default]
    Transductive,
    /// Embeddings and lexicon learned from training folds only.
    Inductive,
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalMode::Transductive => "transductive",
            EvalMode::Inductive => "inductive",
        })
    }
}

impl FromStr for EvalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "transductive" => Ok(EvalMode::Transductive),
            "inductive" => Ok(EvalMode::Inductive),
            _ => Err(Error::Config(format!("unknown evaluation mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Pvdm,
    Pvdbow,
    Bow,
}

/// A pipeline name such as `lexicon+pvdm+mlp`, `pvdm+mlp` or `bow+logreg`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pipeline {
    pub lexicon: bool,
    pub representation: Representation,
    pub classifier: ClassifierKind,
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lexicon {
            f.write_str("lexicon+")?;
        }
        let r = match self.representation {
            Representation::Pvdm => "pvdm",
            Representation::Pvdbow => "pvdbow",
            Representation::Bow => "bow",
        };
        write!(f, "{r}+{}", self.classifier)
    }
}

impl FromStr for Pipeline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Config(format!(
                "bad pipeline {s:?}: expected [lexicon+]{{pvdm|pvdbow|bow}}+{{mlp|logreg|gnb}}"
            ))
        };
        let parts: Vec<&str> = s.split('+').collect();
        let (lexicon, rest) = match parts.as_slice() {
            ["lexicon", rest @ ..] => (true, rest),
            rest => (false, rest),
        };
        let [repr, clf] = rest else { return Err(bad()) };
        let representation = match *repr {
            "pvdm" => Representation::Pvdm,
            "pvdbow" => Representation::Pvdbow,
            "bow" => Representation::Bow,
            _ => return Err(bad()),
        };
        if lexicon && representation == Representation::Bow {
            return Err(Error::Config(
                "lexicon augmentation applies to embedding pipelines only".into(),
            ));
        }
        Ok(Pipeline {
            lexicon,
            representation,
            classifier: clf.parse().map_err(|_| bad())?,
        })
    }
}

/// Where the othering lexicon comes from.
#[derive(Debug, Clone)]
pub enum LexiconSource {
    /// Built beforehand from a separate corpus.
    External(OtheringLexicon),
    /// Built from the hateful documents of the evaluation corpus itself;
    /// per training fold in inductive mode.
    FromEval {
        pronouns: PronounConfig,
        config: LexiconConfig,
    },
}

impl LexiconSource {
    fn describe(&self) -> String {
        match self {
            LexiconSource::External(l) => format!("external:{}", l.provenance().source),
            LexiconSource::FromEval { .. } => "evaluation-corpus".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub pipeline: Pipeline,
    /// The mode field is overridden by the pipeline's representation.
    pub hyper: EmbedHyper,
    pub classifier: ClassifierConfig,
    pub bow: BowConfig,
    pub augment: AugmentOptions,
    /// Only hateful documents contribute dependency-pair tokens.
    pub features_hateful_only: bool,
    /// Z-score classifier inputs with statistics from the training fold.
    pub standardize: bool,
    pub folds: usize,
    /// Inference passes for held-out documents; 0 means `hyper.epochs`.
    pub infer_steps: usize,
    pub seed: u64,
    /// Folds evaluated concurrently.
    pub threads: usize,
}

impl PipelineConfig {
    pub fn new(pipeline: Pipeline) -> Self {
        PipelineConfig {
            pipeline,
            hyper: EmbedHyper::default(),
            classifier: ClassifierConfig::default_for(pipeline.classifier),
            bow: BowConfig::default(),
            augment: AugmentOptions::default(),
            features_hateful_only: false,
            standardize: true,
            folds: 10,
            infer_steps: 0,
            seed: 0,
            threads: 1,
        }
    }

    fn hyper_for(&self, seed: u64) -> EmbedHyper {
        let mode = match self.pipeline.representation {
            Representation::Pvdbow => EmbedMode::Pvdbow,
            _ => EmbedMode::Pvdm,
        };
        EmbedHyper {
            mode,
            seed,
            ..self.hyper.clone()
        }
    }

    fn validate(&self, mode: EvalMode) -> Result<()> {
        if self.classifier.kind() != self.pipeline.classifier {
            return Err(Error::Config(format!(
                "classifier settings are for {} but the pipeline uses {}",
                self.classifier.kind(),
                self.pipeline.classifier
            )));
        }
        if self.threads == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if self.features_hateful_only && mode == EvalMode::Inductive {
            return Err(Error::Config(
                "hateful-only features read test labels and are not available in inductive mode"
                    .into(),
            ));
        }
        if self.pipeline.representation != Representation::Bow {
            self.hyper_for(0).validate()?;
        } else {
            self.bow.validate()?;
        }
        Ok(())
    }
}

/// Why a document is being read during cross-validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Access {
    /// Building a lexicon or training a representation. `fold` is the
    /// held-out fold, or `None` for a corpus-wide fit.
    Fit { fold: Option<usize> },
    /// Producing features for a held-out document of `fold`.
    Apply { fold: usize },
}

/// Indexed read access to an evaluation corpus.
pub trait DocumentSource: Sync {
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn labels(&self) -> Result<Vec<Label>>;
    fn name(&self) -> &str;
    fn document(&self, index: usize, access: Access) -> &Document;
    fn parse(&self, index: usize, access: Access) -> Option<&ParseGraph>;
}

/// A dataset plus optional parses keyed by document id.
pub struct CorpusSource<'a> {
    dataset: &'a Dataset,
    parses: Option<&'a ParseMap>,
}

impl<'a> CorpusSource<'a> {
    pub fn new(dataset: &'a Dataset, parses: Option<&'a ParseMap>) -> Self {
        CorpusSource { dataset, parses }
    }
}

impl DocumentSource for CorpusSource<'_> {
    fn len(&self) -> usize {
        self.dataset.len()
    }

    fn labels(&self) -> Result<Vec<Label>> {
        self.dataset.labels()
    }

    fn name(&self) -> &str {
        self.dataset.name()
    }

    fn document(&self, index: usize, _: Access) -> &Document {
        &self.dataset.documents()[index]
    }

    fn parse(&self, index: usize, _: Access) -> Option<&ParseGraph> {
        let id = &self.dataset.documents()[index].id;
        self.parses.and_then(|p| p.get(id))
    }
}

struct Run<'a> {
    source: &'a dyn DocumentSource,
    lexicon: &'a LexiconSource,
    config: &'a PipelineConfig,
    labels: Vec<Label>,
}

impl Run<'_> {
    fn parse_of(&self, i: usize, access: Access) -> Result<&ParseGraph> {
        self.source
            .parse(i, access)
            .ok_or_else(|| Error::MissingParse(self.source.document(i, access).id.clone()))
    }

    fn lexicon_for(&self, train: &[usize], fold: Option<usize>) -> Result<Option<OtheringLexicon>> {
        if !self.config.pipeline.lexicon {
            return Ok(None);
        }
        match self.lexicon {
            LexiconSource::External(l) => Ok(Some(l.clone())),
            LexiconSource::FromEval { pronouns, config } => {
                let access = Access::Fit { fold };
                let mut pairs = Vec::new();
                for &i in train {
                    if self.labels[i].is_hateful() {
                        pairs.push((self.source.document(i, access), self.parse_of(i, access)?));
                    }
                }
                build_lexicon(self.source.name(), &pairs, pronouns, config).map(Some)
            }
        }
    }

    fn stream(
        &self,
        i: usize,
        access: Access,
        lexicon: Option<&OtheringLexicon>,
    ) -> Result<Vec<String>> {
        let doc = self.source.document(i, access);
        let Some(lexicon) = lexicon else {
            return Ok(doc.tokens.clone());
        };
        let mut opts = self.config.augment;
        if self.config.features_hateful_only && !self.labels[i].is_hateful() {
            opts.emit_features = false;
        }
        Ok(augment(doc, self.parse_of(i, access)?, lexicon, &opts)?.stream())
    }

    fn bow_inputs(&self, i: usize, access: Access) -> (Vec<String>, Option<Vec<String>>) {
        let doc = self.source.document(i, access);
        let deps = self.source.parse(i, access).map(|g| {
            filter_dependencies_with(g, self.config.augment.form)
                .iter()
                .map(|p| p.feature())
                .collect()
        });
        (doc.tokens.clone(), deps)
    }

    /// Feature rows for `train` and `test` documents of one fold, fitting
    /// whatever representation the pipeline needs on `fit` with access
    /// `fit_access`.
    fn features(
        &self,
        fit: &[usize],
        fit_access: Access,
        lexicon: Option<&OtheringLexicon>,
        seed: u64,
    ) -> Result<Represented> {
        let c = self.config;
        match c.pipeline.representation {
            Representation::Bow => {
                let inputs: Vec<_> = fit
                    .iter()
                    .map(|&i| self.bow_inputs(i, fit_access))
                    .collect();
                let words: Vec<&[String]> = inputs.iter().map(|(w, _)| w.as_slice()).collect();
                let deps: Option<Vec<&[String]>> = inputs
                    .iter()
                    .map(|(_, d)| d.as_deref())
                    .collect::<Option<Vec<_>>>();
                let f = BowFeaturizer::fit(&words, deps.as_deref(), &c.bow)?;
                Ok(Represented::Bow(f))
            }
            Representation::Pvdm | Representation::Pvdbow => {
                let docs = fit
                    .iter()
                    .map(|&i| {
                        let id = self.source.document(i, fit_access).id.clone();
                        Ok((id, self.stream(i, fit_access, lexicon)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let model = train(&docs, &c.hyper_for(seed))?;
                Ok(Represented::Embedding(model))
            }
        }
    }

    fn fold(&self, fold: usize, test: &[usize], shared: Option<&Shared>) -> Result<Confusion> {
        let c = self.config;
        let in_test = {
            let mut m = vec![false; self.labels.len()];
            test.iter().for_each(|&i| m[i] = true);
            m
        };
        let train_idx: Vec<usize> = (0..self.labels.len()).filter(|&i| !in_test[i]).collect();
        let apply = Access::Apply { fold };

        let owned;
        let (repr, lexicon, index_of): (&Represented, Option<&OtheringLexicon>, Vec<usize>) =
            match shared {
                Some(s) => (
                    &s.repr,
                    s.lexicon.as_ref(),
                    (0..self.labels.len()).collect(),
                ),
                None => {
                    let fit = Access::Fit { fold: Some(fold) };
                    let lexicon = self.lexicon_for(&train_idx, Some(fold))?;
                    let repr = self.features(
                        &train_idx,
                        fit,
                        lexicon.as_ref(),
                        derive_seed(c.seed, "embed", fold as u64),
                    )?;
                    let mut pos = vec![usize::MAX; self.labels.len()];
                    train_idx.iter().enumerate().for_each(|(r, &i)| pos[i] = r);
                    owned = (repr, lexicon);
                    (&owned.0, owned.1.as_ref(), pos)
                }
            };

        let fitted_row = |i: usize| -> Result<Vec<f64>> {
            let access = if shared.is_some() {
                Access::Fit { fold: None }
            } else {
                Access::Fit { fold: Some(fold) }
            };
            match repr {
                Represented::Embedding(m) => Ok(m.doc_vectors().row(index_of[i]).to_vec()),
                Represented::Bow(f) => {
                    let (w, d) = self.bow_inputs(i, access);
                    Ok(f.transform(&w, d.as_deref()))
                }
            }
        };
        let held_out_row = |i: usize| -> Result<Vec<f64>> {
            if shared.is_some() {
                return fitted_row(i);
            }
            match repr {
                Represented::Embedding(m) => {
                    let tokens = self.stream(i, apply, lexicon)?;
                    let steps = if c.infer_steps == 0 {
                        c.hyper.epochs
                    } else {
                        c.infer_steps
                    };
                    let seed = derive_seed(c.seed, "infer", i as u64);
                    Ok(infer_vector(m, &tokens, steps, c.hyper.lr_start, seed)?.vector)
                }
                Represented::Bow(f) => {
                    let (w, d) = self.bow_inputs(i, apply);
                    Ok(f.transform(&w, d.as_deref()))
                }
            }
        };

        let train_rows = train_idx
            .iter()
            .map(|&i| fitted_row(i))
            .collect::<Result<Vec<_>>>()?;
        let test_rows = test
            .iter()
            .map(|&i| held_out_row(i))
            .collect::<Result<Vec<_>>>()?;
        let scaler = c.standardize.then(|| Standardizer::fit(&train_rows));
        let scale = |x: Vec<f64>| match &scaler {
            Some(s) => s.transform(&x),
            None => x,
        };
        let data: Vec<LabeledVector> = train_rows
            .into_iter()
            .zip(&train_idx)
            .map(|(x, &i)| LabeledVector::new(scale(x), self.labels[i]))
            .collect();
        let model = c
            .classifier
            .with_seed(derive_seed(c.seed, "classifier", fold as u64))
            .train(&data)?;
        let mut confusion = Confusion::default();
        for (x, &i) in test_rows.into_iter().zip(test) {
            let p = model.predict(&scale(x))?;
            confusion.record(self.labels[i], p.label);
        }
        Ok(confusion)
    }
}

fn fold_error(fold: usize, e: Error) -> Error {
    match e {
        Error::Numerical(m) => Error::Numerical(format!("fold {fold}: {m}")),
        Error::Config(m) => Error::Config(format!("fold {fold}: {m}")),
        other => Error::Data(format!("fold {fold}: {other}")),
    }
}

enum Represented {
    Embedding(crate::embedding::EmbeddingModel),
    Bow(BowFeaturizer),
}

struct Shared {
    repr: Represented,
    lexicon: Option<OtheringLexicon>,
}

/// Stratified k-fold evaluation of one pipeline.
///
/// Transductive mode fits the lexicon (when drawn from the evaluation
/// corpus) and the representation once over all documents and trains only
/// the classifier per fold. Inductive mode refits everything per fold from
/// training documents and embeds held-out documents by inference.
pub fn cross_validate(
    source: &dyn DocumentSource,
    lexicon: &LexiconSource,
    config: &PipelineConfig,
    mode: EvalMode,
) -> Result<EvalReport> {
    config.validate(mode)?;
    let labels = source.labels()?;
    let folds = stratified_folds(&labels, config.folds, derive_seed(config.seed, "folds", 0))?;
    let run = Run {
        source,
        lexicon,
        config,
        labels,
    };
    let shared = match mode {
        EvalMode::Transductive => {
            let all: Vec<usize> = (0..run.labels.len()).collect();
            let access = Access::Fit { fold: None };
            let lexicon = run.lexicon_for(&all, None)?;
            let repr = run.features(
                &all,
                access,
                lexicon.as_ref(),
                derive_seed(config.seed, "embed", u64::MAX),
            )?;
            Some(Shared { repr, lexicon })
        }
        EvalMode::Inductive => None,
    };
    let eval_fold = |(k, test): (usize, &Vec<usize>)| {
        run.fold(k, test, shared.as_ref())
            .map_err(|e| fold_error(k, e))
    };
    let confusions: Vec<Confusion> = if config.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| {
            folds
                .par_iter()
                .enumerate()
                .map(eval_fold)
                .collect::<Result<Vec<_>>>()
        })?
    } else {
        folds
            .iter()
            .enumerate()
            .map(eval_fold)
            .collect::<Result<Vec<_>>>()?
    };
    let fold_results = folds
        .iter()
        .zip(confusions)
        .enumerate()
        .map(|(k, (test, confusion))| FoldResult {
            fold: k,
            test_size: test.len(),
            test_indices: test.clone(),
            confusion,
        })
        .collect();
    Ok(EvalReport::new(
        PipelineDescriptor::new(config, &lexicon.describe()),
        mode,
        config.seed,
        fold_results,
    ))
}
