//! Independent oracles and fixtures shared by the integration tests and the
//! acceptance runner. Nothing here calls the code it is used to check.

#![allow(dead_code, clippy::needless_range_loop, clippy::type_complexity)]

pub mod checks;

use std::collections::BTreeSet;
use std::path::PathBuf;

use othering::corpus::{Dataset, Document, Label, PronounConfig};
use othering::matrix::Matrix;
use othering::parse::{heuristic_parse, read_conllu, ParseGraph};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("fixtures")
        .join(name)
}

pub fn worked_example_graph() -> ParseGraph {
    let text = std::fs::read_to_string(fixture("worked_example.conllu")).unwrap();
    read_conllu(text.as_bytes()).unwrap().remove(0)
}

// ---------------------------------------------------------------------------
// Finite differences

/// Central difference of `f` along coordinate `i` of `x`.
pub fn central_difference(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut p = x.to_vec();
    p[i] = x[i] + h;
    let up = f(&p);
    p[i] = x[i] - h;
    let down = f(&p);
    (up - down) / (2.0 * h)
}

/// `|a - b| / max(|a|, |b|)`, with gradients both below `floor` in
/// magnitude counted as agreeing.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < floor {
        return 0.0;
    }
    (a - b).abs() / scale
}

/// Largest relative error between `analytic` and central differences of
/// `f` at `x`.
pub fn max_gradient_error(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x: &[f64],
    analytic: &[f64],
    h: f64,
) -> f64 {
    assert_eq!(x.len(), analytic.len());
    (0..x.len())
        .map(|i| relative_error(analytic[i], central_difference(f, x, i, h), 1e-7))
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Dense symmetric eigensolver

/// Cyclic Jacobi rotations on a symmetric matrix. Returns eigenvalues in
/// descending order with unit eigenvectors.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> Vec<(f64, Vec<f64>)> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|j| (m[j][j], (0..n).map(|i| v[i][j]).collect()))
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    pairs
}

/// Sample covariance (divisor n - 1), computed directly.
pub fn naive_covariance(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    (0..d)
        .map(|a| {
            (0..d)
                .map(|b| {
                    rows.iter()
                        .map(|r| (r[a] - mean[a]) * (r[b] - mean[b]))
                        .sum::<f64>()
                        / (n - 1) as f64
                })
                .collect()
        })
        .collect()
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_vec(
        rows,
        cols,
        (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    )
}

/// Flip `v` so its first entry with magnitude above 1e-12 is positive.
pub fn canonical_sign(v: &[f64]) -> Vec<f64> {
    let s = v
        .iter()
        .find(|x| x.abs() > 1e-12)
        .map_or(1.0, |x| x.signum());
    v.iter().map(|x| x * s).collect()
}

// ---------------------------------------------------------------------------
// Naive lexicon re-derivation

const SIX: [&str; 6] = ["nsubj", "dobj", "nmod", "det", "advmod", "compound"];
const CONTENT_PREFIXES: [&str; 4] = ["NN", "JJ", "VB", "RB"];

pub fn naive_two_sided(tokens: &[String], pronouns: &PronounConfig) -> bool {
    let mut inside = false;
    let mut outside = false;
    for t in tokens {
        if pronouns.ingroup().contains(t) {
            inside = true;
        }
        if pronouns.outgroup().contains(t) {
            outside = true;
        }
    }
    inside && outside
}

/// The three lexicon components derived by direct traversal: keep
/// two-sided hateful documents, read retained edges off the raw token
/// table, collect content words, then union.
pub fn naive_lexicon(
    hateful: &[(Document, ParseGraph)],
    pronouns: &PronounConfig,
) -> (BTreeSet<String>, BTreeSet<String>, BTreeSet<String>) {
    let mut deps = BTreeSet::new();
    let mut words = BTreeSet::new();
    for (doc, graph) in hateful {
        if !naive_two_sided(&doc.tokens, pronouns) {
            continue;
        }
        let toks = graph.tokens();
        for t in toks {
            let label = t.deprel.to_lowercase();
            let mut base = label.split(':').next().unwrap().to_string();
            if base == "obj" {
                base = "dobj".into();
            }
            if !SIX.contains(&base.as_str()) {
                continue;
            }
            let head = if t.head == 0 {
                "root".to_string()
            } else {
                toks[t.head - 1].form.to_lowercase()
            };
            deps.insert(format!("{}({},{})", base, head, t.form.to_lowercase()));
        }
        for t in toks {
            if CONTENT_PREFIXES.iter().any(|p| t.pos.starts_with(p)) {
                words.insert(t.form.to_lowercase());
            }
        }
    }
    let all = pronouns.all_pronouns().clone();
    words.retain(|w| !all.contains(w));
    (deps, words, all)
}

const MINI_WORDS: [&str; 24] = [
    "we", "us", "our", "they", "them", "their", "i", "he", "send", "hate", "ban", "want",
    "quickly", "home", "country", "dogs", "the", "a", "all", "good", "running", "deported",
    "really", "people",
];

/// `n` hateful documents of 1 to 9 words with heuristic parses.
pub fn random_mini_corpus<R: Rng>(rng: &mut R, n: usize) -> Vec<(Document, ParseGraph)> {
    (0..n)
        .map(|i| {
            let len = rng.gen_range(1..10);
            let words: Vec<&str> = (0..len).map(|_| *MINI_WORDS.choose(rng).unwrap()).collect();
            let id = format!("m{i}");
            let doc = Document::new(&id, words.join(" "), Some(Label::Hateful));
            let graph = heuristic_parse(&id, &doc.tokens).unwrap();
            (doc, graph)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Small corpora

/// Labels in the given counts, randomly interleaved.
pub fn shuffled_labels<R: Rng>(rng: &mut R, hateful: usize, non_hateful: usize) -> Vec<Label> {
    let mut labels = vec![Label::Hateful; hateful];
    labels.extend(vec![Label::NonHateful; non_hateful]);
    labels.shuffle(rng);
    labels
}

/// A dataset whose two classes use disjoint vocabularies.
pub fn disjoint_vocab_dataset<R: Rng>(rng: &mut R, per_class: usize, len: usize) -> Dataset {
    let hateful: Vec<String> = (0..8).map(|i| format!("hx{i}")).collect();
    let benign: Vec<String> = (0..8).map(|i| format!("by{i}")).collect();
    let mut docs = Vec::new();
    for i in 0..2 * per_class {
        let (vocab, label) = if i % 2 == 0 {
            (&hateful, Label::Hateful)
        } else {
            (&benign, Label::NonHateful)
        };
        let text: Vec<&str> = (0..len)
            .map(|_| vocab.choose(rng).unwrap().as_str())
            .collect();
        docs.push(Document::new(
            format!("d{i:03}"),
            text.join(" "),
            Some(label),
        ));
    }
    Dataset::new("disjoint", docs).unwrap()
}

/// The same documents with labels permuted.
pub fn with_shuffled_labels<R: Rng>(dataset: &Dataset, rng: &mut R) -> Dataset {
    let mut labels: Vec<Option<Label>> = dataset.documents().iter().map(|d| d.label).collect();
    labels.shuffle(rng);
    let docs = dataset
        .documents()
        .iter()
        .zip(labels)
        .map(|(d, l)| Document {
            label: l,
            ..d.clone()
        })
        .collect();
    Dataset::new(format!("{}-shuffled", dataset.name()), docs).unwrap()
}

/// Two-sided standard deviation bound for a binomial proportion.
pub fn binomial_sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Standard normal draw by the Box-Muller transform.
pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Two Gaussian classes in 2-D with unit spread and means at `(±offset, 0)`.
pub fn blobs<R: Rng>(rng: &mut R, n: usize, offset: f64) -> Vec<othering::classify::LabeledVector> {
    (0..n)
        .map(|i| {
            let (label, cx) = if i % 2 == 0 {
                (Label::Hateful, offset)
            } else {
                (Label::NonHateful, -offset)
            };
            othering::classify::LabeledVector::new(vec![cx + normal(rng), normal(rng)], label)
        })
        .collect()
}

/// Every (P, R, F) triple of the hateful-class results table: four
/// datasets for each of five models.
pub const PUBLISHED_RESULTS: [(&str, [(f64, f64, f64); 4]); 5] = [
    (
        "baseline 1",
        [
            (0.89, 0.69, 0.77),
            (0.97, 0.61, 0.75),
            (0.87, 0.66, 0.75),
            (0.72, 0.35, 0.47),
        ],
    ),
    (
        "baseline 2",
        [
            (0.79, 0.88, 0.83),
            (0.18, 0.08, 0.11),
            (0.16, 0.50, 0.24),
            (0.91, 0.95, 0.94),
        ],
    ),
    (
        "baseline 3",
        [
            (0.84, 0.86, 0.85),
            (0.29, 0.83, 0.43),
            (0.85, 0.88, 0.86),
            (0.88, 0.95, 0.91),
        ],
    ),
    (
        "proposed 1",
        [
            (0.82, 0.82, 0.90),
            (0.78, 0.43, 0.55),
            (0.64, 0.93, 0.77),
            (0.80, 1.00, 0.88),
        ],
    ),
    (
        "proposed 2",
        [
            (0.98, 0.89, 0.93),
            (0.80, 0.95, 0.86),
            (0.94, 0.98, 0.97),
            (0.97, 0.99, 0.98),
        ],
    ),
];

/// Whether printed F can arise from some precision and recall that round to
/// the printed P and R, allowing F its own rounding.
pub fn reconcilable(p: f64, r: f64, f: f64, f_measure: impl Fn(f64, f64) -> f64) -> bool {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for a in [p - 0.005, p + 0.005] {
        for b in [r - 0.005, (r + 0.005).min(1.0)] {
            let v = f_measure(a.clamp(0.0, 1.0), b.clamp(0.0, 1.0));
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    lo - 0.005 <= f && f <= hi + 0.005
}
