//! Randomized checks shared by the integration tests and the acceptance
//! runner. Each returns a summary the caller can assert on or print.

use std::collections::BTreeSet;

use othering::classify::{
    logreg_gradient, logreg_loss, mlp_gradient, mlp_loss, Activation, LabeledVector, LogReg, Mlp,
    MlpConfig,
};
use othering::corpus::{Label, PronounConfig};
use othering::embedding::objective::{example_gradient, example_loss, Example, Params};
use othering::embedding::{train, EmbedHyper, EmbedMode, EmbeddingModel};
use othering::eval::{
    cross_validate, generate_synthetic, stratified_folds, CorpusSource, EvalMode, LexiconSource,
    PipelineConfig, SyntheticCorpus, SyntheticSpec,
};
use othering::lexicon::{
    augment, build_lexicon, build_lexicon_from_dataset, AugmentOptions, LexiconConfig,
    OtheringLexicon,
};
use othering::matrix::Matrix;
use othering::parse::index_parses;
use othering::project::{neighbors, pca2d};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    canonical_sign, jacobi_eigen, max_gradient_error, naive_covariance, naive_lexicon,
    random_matrix, random_mini_corpus, shuffled_labels,
};

pub const FD_STEP: f64 = 1e-5;

fn flatten(p: &Params) -> Vec<f64> {
    let mut v = p.docs.as_slice().to_vec();
    v.extend_from_slice(p.words.as_slice());
    v.extend_from_slice(p.outs.as_slice());
    v
}

fn unflatten(like: &Params, v: &[f64]) -> Params {
    let mut out = like.clone();
    let (a, rest) = v.split_at(like.docs.as_slice().len());
    let (b, c) = rest.split_at(like.words.as_slice().len());
    out.docs.as_mut_slice().copy_from_slice(a);
    out.words.as_mut_slice().copy_from_slice(b);
    out.outs.as_mut_slice().copy_from_slice(c);
    out
}

fn random_table<R: Rng>(rng: &mut R, rows: usize, dim: usize) -> Matrix {
    Matrix::from_vec(
        rows,
        dim,
        (0..rows * dim).map(|_| rng.gen_range(-0.8..0.8)).collect(),
    )
}

/// Worst relative error of the negative-sampling gradient on one random
/// instance (vocabulary up to 10, dim up to 8).
pub fn embedding_gradient_error(mode: EmbedMode, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = rng.gen_range(3..=10);
    let dim = rng.gen_range(2..=8);
    let n_docs = rng.gen_range(1..=3);
    let params = Params {
        docs: random_table(&mut rng, n_docs, dim),
        words: random_table(&mut rng, vocab, dim),
        outs: random_table(&mut rng, vocab, dim),
    };
    let contexts: Vec<usize> = match mode {
        EmbedMode::Pvdm => (0..rng.gen_range(0..=4))
            .map(|_| rng.gen_range(0..vocab))
            .collect(),
        EmbedMode::Pvdbow => Vec::new(),
    };
    let negatives: Vec<usize> = (0..rng.gen_range(1..=5))
        .map(|_| rng.gen_range(0..vocab))
        .collect();
    let ex = Example {
        doc: rng.gen_range(0..n_docs),
        contexts: &contexts,
        target: rng.gen_range(0..vocab),
        negatives: &negatives,
    };
    let (_, grad) = example_gradient(&params, &ex, mode);
    let x = flatten(&params);
    let mut f = |v: &[f64]| example_loss(&unflatten(&params, v), &ex, mode);
    max_gradient_error(&mut f, &x, &flatten(&grad), FD_STEP)
}

fn random_labeled<R: Rng>(rng: &mut R, n: usize, dim: usize) -> Vec<LabeledVector> {
    (0..n)
        .map(|i| {
            let label = if i % 2 == 0 {
                Label::Hateful
            } else {
                Label::NonHateful
            };
            LabeledVector::new((0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect(), label)
        })
        .collect()
}

/// Worst relative error of the MLP backpropagation gradient on one random
/// network and batch.
pub fn mlp_gradient_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.gen_range(1..=5);
    let cfg = MlpConfig {
        hidden_layers: rng.gen_range(1..=3),
        hidden_units: rng.gen_range(1..=5),
        activation: if rng.gen_bool(0.5) {
            Activation::Tanh
        } else {
            Activation::Logistic
        },
        seed,
        ..MlpConfig::default()
    };
    let mut mlp = Mlp::init(dim, &cfg);
    let mut params = mlp.parameters();
    params
        .iter_mut()
        .for_each(|p| *p += rng.gen_range(-0.5..0.5));
    mlp.set_parameters(&params);
    let n = rng.gen_range(3..=8);
    let data = random_labeled(&mut rng, n, dim);
    let (_, grad) = mlp_gradient(&mlp, &data);
    let mut probe = mlp.clone();
    let mut f = |v: &[f64]| {
        probe.set_parameters(v);
        mlp_loss(&probe, &data)
    };
    max_gradient_error(&mut f, &params, &grad, FD_STEP)
}

/// Worst relative error of the regularized logistic-regression gradient.
pub fn logreg_gradient_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.gen_range(1..=6);
    let l2 = rng.gen_range(0.0..0.2);
    let model = LogReg {
        weights: (0..dim).map(|_| rng.gen_range(-1.5..1.5)).collect(),
        bias: rng.gen_range(-1.0..1.0),
    };
    let n = rng.gen_range(3..=10);
    let data = random_labeled(&mut rng, n, dim);
    let (_, grad) = logreg_gradient(&model, &data, l2);
    let mut probe = model.clone();
    let mut f = |v: &[f64]| {
        probe.set_parameters(v);
        logreg_loss(&probe, &data, l2)
    };
    max_gradient_error(&mut f, &model.parameters(), &grad, FD_STEP)
}

/// Largest deviation between `pca2d` and the Jacobi oracle on one random
/// matrix with at most 10 rows and 10 columns: `(components, variances)`.
pub fn pca_oracle_error(seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=10);
    let dim = rng.gen_range(2..=10);
    let x = random_matrix(&mut rng, n, dim);
    let rows: Vec<Vec<f64>> = x.iter_rows().map(|r| r.to_vec()).collect();
    let eig = jacobi_eigen(&naive_covariance(&rows));
    let p = pca2d(&x).expect("pca on a random matrix");
    let mut comp_err = 0.0f64;
    let mut var_err = 0.0f64;
    for k in 0..2 {
        let expected = canonical_sign(&eig[k].1);
        for (a, b) in p.components.row(k).iter().zip(&expected) {
            comp_err = comp_err.max((a - b).abs());
        }
        var_err = var_err.max((p.variances[k] - eig[k].0.max(0.0)).abs());
    }
    (comp_err, var_err)
}

/// Whether `build_lexicon` agrees with the naive re-derivation on one random
/// mini-corpus.
pub fn lexicon_oracle_agrees(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(0..=12);
    let corpus = random_mini_corpus(&mut rng, n);
    let pronouns = PronounConfig::default();
    let pairs: Vec<_> = corpus.iter().map(|(d, g)| (d, g)).collect();
    let built = build_lexicon("mini", &pairs, &pronouns, &LexiconConfig::default())
        .map_err(|e| e.to_string())?;
    let (deps, words, prons) = naive_lexicon(&corpus, &pronouns);
    let diff = |name: &str, got: &BTreeSet<String>, want: &BTreeSet<String>| {
        if got == want {
            Ok(())
        } else {
            Err(format!(
                "{name}: extra {:?}, missing {:?}",
                got.difference(want).collect::<Vec<_>>(),
                want.difference(got).collect::<Vec<_>>()
            ))
        }
    };
    diff("dep", built.dep_entries(), &deps)?;
    diff("word", built.pos_words(), &words)?;
    diff("pronoun", built.pronouns(), &prons)
}

/// Checks the fold partition and the per-fold stratification bound on one
/// random dataset.
pub fn stratification_holds(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(2..=10);
    let pos = rng.gen_range(k..=k + 60);
    let neg = rng.gen_range(k..=k + 200);
    let labels = shuffled_labels(&mut rng, pos, neg);
    let folds = stratified_folds(&labels, k, seed).map_err(|e| e.to_string())?;
    if folds.len() != k {
        return Err(format!("{} folds for k = {k}", folds.len()));
    }
    let mut seen = vec![0usize; labels.len()];
    for f in &folds {
        f.iter().for_each(|&i| seen[i] += 1);
    }
    if seen.iter().any(|&c| c != 1) {
        return Err("folds do not partition the indices".into());
    }
    for (class, total) in [(Label::Hateful, pos), (Label::NonHateful, neg)] {
        let share = total as f64 / k as f64;
        for (j, f) in folds.iter().enumerate() {
            let c = f.iter().filter(|&&i| labels[i] == class).count();
            if (c as f64 - share).abs() >= 1.0 {
                return Err(format!(
                    "fold {j} has {c} of class {class:?}, proportional share {share:.2}"
                ));
            }
        }
    }
    Ok(())
}

/// A planted corpus and a lexicon built from a second, independently
/// sampled corpus with its own vocabulary.
pub fn planted_with_lexicon(seed: u64) -> (SyntheticCorpus, OtheringLexicon) {
    let spec = SyntheticSpec {
        seed,
        vocab_seed: seed,
        ..SyntheticSpec::default()
    };
    let corpus = generate_synthetic(&spec).expect("planted corpus");
    let source = generate_synthetic(&SyntheticSpec {
        seed: seed + 1000,
        vocab_seed: seed + 1000,
        ..spec
    })
    .expect("lexicon source corpus");
    let lexicon = build_lexicon_from_dataset(
        &source.dataset,
        &index_parses(source.parses.clone()),
        &PronounConfig::default(),
        &LexiconConfig::default(),
    )
    .expect("lexicon");
    (corpus, lexicon)
}

/// Embedding settings of the end-to-end and neighbour checks.
pub fn planted_hyper(seed: u64) -> EmbedHyper {
    EmbedHyper {
        dim: 50,
        window: 2,
        epochs: 20,
        lr_start: 0.05,
        seed,
        ..EmbedHyper::default()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NeighborFractions {
    /// Motif words among the 20 nearest neighbours of "us".
    pub plain_words: f64,
    pub augmented_words: f64,
    /// Same, also counting dependency-pair and marker tokens built on motif words.
    pub plain_derived: f64,
    pub augmented_derived: f64,
    /// Motif words among 20 tokens drawn uniformly from the augmented vocabulary.
    pub uniform_words: f64,
}

/// Neighbourhood of "us" in plain-token and lexicon-augmented models
/// trained on the same planted corpus.
pub fn neighbor_fractions(seed: u64) -> NeighborFractions {
    let (corpus, lexicon) = planted_with_lexicon(seed);
    let docs = corpus.dataset.documents();
    let plain: Vec<(String, Vec<String>)> = docs
        .iter()
        .map(|d| (d.id.clone(), d.tokens.clone()))
        .collect();
    let augmented: Vec<(String, Vec<String>)> = docs
        .iter()
        .zip(&corpus.parses)
        .map(|(d, g)| {
            let a = augment(d, g, &lexicon, &AugmentOptions::default()).expect("augment");
            (d.id.clone(), a.stream())
        })
        .collect();
    let hyper = planted_hyper(seed);
    let plain_model = train(&plain, &hyper).expect("plain model");
    let aug_model = train(&augmented, &hyper).expect("augmented model");
    let motif = SyntheticCorpus::motif_tokens();
    let is_word = |t: &str| motif.contains(t);
    let fraction = |tokens: &[&str], f: &dyn Fn(&str) -> bool| {
        tokens.iter().filter(|t| f(t)).count() as f64 / tokens.len() as f64
    };
    let nearest = |m: &EmbeddingModel| -> Vec<String> {
        neighbors(m, "us", 20)
            .expect("anchor in vocabulary")
            .into_iter()
            .map(|n| n.token)
            .collect()
    };
    let np = nearest(&plain_model);
    let na = nearest(&aug_model);
    let np: Vec<&str> = np.iter().map(String::as_str).collect();
    let na: Vec<&str> = na.iter().map(String::as_str).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uniform: Vec<&str> = aug_model
        .vocab()
        .tokens()
        .choose_multiple(&mut rng, 20)
        .map(String::as_str)
        .collect();
    NeighborFractions {
        plain_words: fraction(&np, &is_word),
        augmented_words: fraction(&na, &is_word),
        plain_derived: fraction(&np, &SyntheticCorpus::is_motif_token),
        augmented_derived: fraction(&na, &SyntheticCorpus::is_motif_token),
        uniform_words: fraction(&uniform, &is_word),
    }
}

/// Hateful-class F1 of the lexicon-augmented and embedding-only PV-DM + MLP
/// pipelines under transductive 10-fold CV on one planted corpus.
pub fn end_to_end_f1(seed: u64) -> (f64, f64) {
    let (corpus, lexicon) = planted_with_lexicon(seed);
    let parses = index_parses(corpus.parses.clone());
    let source = CorpusSource::new(&corpus.dataset, Some(&parses));
    let run = |name: &str| {
        let mut cfg = PipelineConfig::new(name.parse().expect("pipeline name"));
        cfg.hyper = planted_hyper(seed);
        cfg.seed = seed;
        cross_validate(
            &source,
            &LexiconSource::External(lexicon.clone()),
            &cfg,
            EvalMode::Transductive,
        )
        .expect("cross-validation")
        .hateful
        .f_measure
    };
    (run("lexicon+pvdm+mlp"), run("pvdm+mlp"))
}
