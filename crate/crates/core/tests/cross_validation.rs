//! Cross-validation behaviour on small corpora.

mod support;

use std::collections::HashSet;
use std::sync::Mutex;

use othering::classify::ClassifierConfig;
use othering::corpus::{Dataset, Document, Label, PronounConfig};
use othering::embedding::EmbedHyper;
use othering::eval::{
    cross_validate, generate_synthetic, Access, CorpusSource, DocumentSource, EvalMode,
    LexiconSource, PipelineConfig, SyntheticSpec,
};
use othering::lexicon::LexiconConfig;
use othering::parse::{index_parses, ParseGraph, ParseMap};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{disjoint_vocab_dataset, with_shuffled_labels};

fn small_hyper() -> EmbedHyper {
    EmbedHyper {
        dim: 16,
        epochs: 15,
        min_count: 1,
        ..EmbedHyper::default()
    }
}

fn config(pipeline: &str, seed: u64) -> PipelineConfig {
    let mut c = PipelineConfig::new(pipeline.parse().unwrap());
    c.hyper = small_hyper();
    c.seed = seed;
    c.folds = 5;
    c
}

fn from_eval() -> LexiconSource {
    LexiconSource::FromEval {
        pronouns: PronounConfig::default(),
        config: LexiconConfig::default(),
    }
}

#[test]
fn separable_classes_score_perfectly() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let ds = disjoint_vocab_dataset(&mut rng, 40, 12);
    let source = CorpusSource::new(&ds, None);
    let report = cross_validate(
        &source,
        &from_eval(),
        &config("pvdbow+logreg", 1),
        EvalMode::Transductive,
    )
    .unwrap();
    assert_eq!(report.hateful.f_measure, 1.0);
    assert_eq!(report.aggregate.total(), 80);
}

#[test]
fn shuffled_labels_sit_near_chance() {
    let synth = generate_synthetic(&SyntheticSpec {
        n_docs: 200,
        seed: 5,
        ..SyntheticSpec::default()
    })
    .unwrap();
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let ds = with_shuffled_labels(&synth.dataset, &mut rng);
        let base = ds.class_counts()[&Label::Hateful] as f64 / ds.len() as f64;
        let source = CorpusSource::new(&ds, None);
        let report = cross_validate(
            &source,
            &from_eval(),
            &config("pvdm+logreg", seed),
            EvalMode::Transductive,
        )
        .unwrap();
        let f = report.hateful.f_measure;
        assert!(
            (f - base).abs() <= 0.15,
            "seed {seed}: F {f:.3} vs chance {base:.3}"
        );
    }
}

#[test]
fn both_modes_share_fold_partitions() {
    let synth = generate_synthetic(&SyntheticSpec {
        n_docs: 60,
        ..SyntheticSpec::default()
    })
    .unwrap();
    let parses = index_parses(synth.parses.clone());
    let source = CorpusSource::new(&synth.dataset, Some(&parses));
    let mut c = config("lexicon+pvdm+gnb", 9);
    c.hyper.epochs = 3;
    let t = cross_validate(&source, &from_eval(), &c, EvalMode::Transductive).unwrap();
    let i = cross_validate(&source, &from_eval(), &c, EvalMode::Inductive).unwrap();
    let folds = |r: &othering::eval::EvalReport| {
        r.folds
            .iter()
            .map(|f| f.test_indices.clone())
            .collect::<Vec<_>>()
    };
    assert_eq!(folds(&t), folds(&i));
    for r in [&t, &i] {
        let mut sum = othering::eval::Confusion::default();
        r.folds.iter().for_each(|f| sum += f.confusion);
        assert_eq!(sum, r.aggregate);
        assert_eq!(r.aggregate.total(), 60);
    }
}

/// Records every read with its declared purpose.
struct Tracking<'a> {
    inner: CorpusSource<'a>,
    reads: Mutex<Vec<(usize, Access)>>,
}

impl DocumentSource for Tracking<'_> {
    fn len(&self) -> usize {
        self.inner.len()
    }
    fn labels(&self) -> othering::Result<Vec<Label>> {
        self.inner.labels()
    }
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn document(&self, index: usize, access: Access) -> &Document {
        self.reads.lock().unwrap().push((index, access));
        self.inner.document(index, access)
    }
    fn parse(&self, index: usize, access: Access) -> Option<&ParseGraph> {
        self.reads.lock().unwrap().push((index, access));
        self.inner.parse(index, access)
    }
}

#[test]
fn inductive_mode_never_fits_on_held_out_documents() {
    let synth = generate_synthetic(&SyntheticSpec {
        n_docs: 50,
        seed: 3,
        ..SyntheticSpec::default()
    })
    .unwrap();
    let parses = index_parses(synth.parses.clone());
    for pipeline in ["lexicon+pvdm+logreg", "pvdbow+mlp", "bow+gnb"] {
        let source = Tracking {
            inner: CorpusSource::new(&synth.dataset, Some(&parses)),
            reads: Mutex::new(Vec::new()),
        };
        let mut c = config(pipeline, 4);
        c.hyper.epochs = 3;
        c.infer_steps = 3;
        let report = cross_validate(&source, &from_eval(), &c, EvalMode::Inductive).unwrap();
        let test_sets: Vec<HashSet<usize>> = report
            .folds
            .iter()
            .map(|f| f.test_indices.iter().copied().collect())
            .collect();
        let reads = source.reads.into_inner().unwrap();
        let mut fitted = 0;
        for (i, access) in reads {
            match access {
                Access::Fit { fold: Some(k) } => {
                    fitted += 1;
                    assert!(
                        !test_sets[k].contains(&i),
                        "{pipeline}: fold {k} fit read held-out {i}"
                    );
                }
                Access::Fit { fold: None } => {
                    panic!("{pipeline}: corpus-wide fit in inductive mode")
                }
                Access::Apply { fold } => {
                    assert!(
                        test_sets[fold].contains(&i),
                        "{pipeline}: fold {fold} applied to {i}"
                    )
                }
            }
        }
        assert!(fitted > 0);
    }
}

#[test]
fn transductive_mode_fits_once_over_everything() {
    let synth = generate_synthetic(&SyntheticSpec {
        n_docs: 40,
        ..SyntheticSpec::default()
    })
    .unwrap();
    let parses = index_parses(synth.parses.clone());
    let source = Tracking {
        inner: CorpusSource::new(&synth.dataset, Some(&parses)),
        reads: Mutex::new(Vec::new()),
    };
    let mut c = config("lexicon+pvdm+gnb", 2);
    c.hyper.epochs = 2;
    cross_validate(&source, &from_eval(), &c, EvalMode::Transductive).unwrap();
    let reads = source.reads.into_inner().unwrap();
    let wide: HashSet<usize> = reads
        .iter()
        .filter(|(_, a)| *a == Access::Fit { fold: None })
        .map(|(i, _)| *i)
        .collect();
    assert_eq!(wide.len(), 40);
    assert!(reads
        .iter()
        .all(|(_, a)| matches!(a, Access::Fit { fold: None })));
}

#[test]
fn fold_failures_name_the_fold() {
    let synth = generate_synthetic(&SyntheticSpec {
        n_docs: 30,
        ..SyntheticSpec::default()
    })
    .unwrap();
    let hateful = synth
        .dataset
        .documents()
        .iter()
        .find(|d| d.label == Some(Label::Hateful))
        .unwrap()
        .id
        .clone();
    let mut parses: ParseMap = index_parses(synth.parses.clone());
    parses.remove(&hateful);
    let source = CorpusSource::new(&synth.dataset, Some(&parses));
    let mut c = config("lexicon+pvdm+logreg", 0);
    c.folds = 3;
    c.hyper.epochs = 1;
    let err = cross_validate(&source, &from_eval(), &c, EvalMode::Inductive).unwrap_err();
    let msg = err.to_string();
    assert!(msg.starts_with("fold "), "{msg}");
    assert!(msg.contains(&hateful), "{msg}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn invalid_combinations_are_usage_errors() {
    let ds = Dataset::new(
        "tiny",
        (0..20)
            .map(|i| {
                Document::new(
                    format!("d{i}"),
                    "we go",
                    Some(Label::from_u8((i % 2) as u8).unwrap()),
                )
            })
            .collect(),
    )
    .unwrap();
    let source = CorpusSource::new(&ds, None);
    let mut c = config("pvdm+mlp", 0);
    c.features_hateful_only = true;
    let err = cross_validate(&source, &from_eval(), &c, EvalMode::Inductive).unwrap_err();
    assert_eq!(err.exit_code(), 1);

    let mut c = config("pvdm+mlp", 0);
    c.classifier = ClassifierConfig::default_for(othering::classify::ClassifierKind::Gnb);
    assert_eq!(
        cross_validate(&source, &from_eval(), &c, EvalMode::Transductive)
            .unwrap_err()
            .exit_code(),
        1
    );

    assert!("lexicon+bow+mlp"
        .parse::<othering::eval::Pipeline>()
        .is_err());
}
