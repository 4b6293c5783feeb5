//! Embedding-space inspection: 2-D PCA, nearest neighbours around an anchor
//! token, cosine-distance bands and export to projector-style TSV files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::corpus::PronounConfig;
use crate::embedding::{cosine_distance, EmbeddingModel};
use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};
use crate::parse::feature_relation;

pub const PCA_TOLERANCE: f64 = 1e-10;
pub const PCA_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    /// `n x 2`
    pub coords: Matrix,
    /// `2 x dim`, orthonormal rows.
    pub components: Matrix,
    pub mean: Vec<f64>,
    /// Covariance eigenvalues of the two components.
    pub variances: [f64; 2],
    /// Variances as fractions of the total variance.
    pub variance_fractions: [f64; 2],
}

/// Sample covariance (divisor `n - 1`) and column means.
pub fn covariance(x: &Matrix) -> (Matrix, Vec<f64>) {
    let (n, d) = (x.rows(), x.cols());
    let mut mean = vec![0.0; d];
    for r in x.iter_rows() {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v / n as f64;
        }
    }
    let mut cov = Matrix::zeros(d, d);
    for r in x.iter_rows() {
        for i in 0..d {
            let ci = r[i] - mean[i];
            for j in i..d {
                let v = cov.get(i, j) + ci * (r[j] - mean[j]);
                cov.set(i, j, v);
            }
        }
    }
    let denom = (n.max(2) - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = cov.get(i, j) / denom;
            cov.set(i, j, v);
            cov.set(j, i, v);
        }
    }
    (cov, mean)
}

fn mat_vec(m: &Matrix, v: &[f64]) -> Vec<f64> {
    m.iter_rows().map(|r| dot(r, v)).collect()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Flip `v` so its first clearly non-zero entry is positive.
fn fix_sign(v: &mut [f64]) {
    if let Some(&x) = v.iter().find(|x| x.abs() > 1e-12) {
        if x < 0.0 {
            v.iter_mut().for_each(|y| *y = -*y);
        }
    }
}

/// Dominant eigenpair of a symmetric matrix, or `None` when it is zero.
fn dominant(m: &Matrix, scale: f64) -> Result<Option<(f64, Vec<f64>)>> {
    let start = (0..m.cols())
        .map(|j| (j, m.iter_rows().map(|r| r[j] * r[j]).sum::<f64>()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .filter(|&(_, n)| n.sqrt() > 1e-13 * scale);
    let Some((j, _)) = start else { return Ok(None) };
    let mut v: Vec<f64> = m.iter_rows().map(|r| r[j]).collect();
    normalize(&mut v);
    let mut residual = f64::INFINITY;
    for _ in 0..PCA_MAX_ITERATIONS {
        let mut w = mat_vec(m, &v);
        let lambda = dot(&v, &w);
        residual = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= PCA_TOLERANCE * scale {
            return Ok(Some((lambda, v)));
        }
        if normalize(&mut w) == 0.0 {
            return Ok(None);
        }
        v = w;
    }
    Err(Error::Numerical(format!(
        "power iteration did not converge in {PCA_MAX_ITERATIONS} iterations (residual {residual:.3e})"
    )))
}

/// Unit vector orthogonal to `v`, from the basis vector least aligned with it.
fn orthogonal_completion(v: &[f64]) -> Vec<f64> {
    let j = (0..v.len())
        .min_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()))
        .expect("dim >= 2");
    let mut e = vec![0.0; v.len()];
    e[j] = 1.0;
    let p = dot(&e, v);
    e.iter_mut().zip(v).for_each(|(x, y)| *x -= p * y);
    normalize(&mut e);
    e
}

/// Top two principal components by power iteration with deflation.
pub fn pca2d(vectors: &Matrix) -> Result<Projection> {
    let (n, d) = (vectors.rows(), vectors.cols());
    if n < 3 || d < 2 {
        return Err(Error::Data(format!(
            "pca needs at least 3 points in 2 or more dimensions (got {n} x {d})"
        )));
    }
    if !vectors.is_finite() {
        return Err(Error::Numerical("pca input has non-finite entries".into()));
    }
    let (cov, mean) = covariance(vectors);
    let total: f64 = (0..d).map(|i| cov.get(i, i)).sum();
    if total <= 0.0 {
        return Err(Error::Numerical("pca input has zero variance".into()));
    }
    let Some((l1, mut c1)) = dominant(&cov, total)? else {
        return Err(Error::Numerical("pca input has zero variance".into()));
    };
    fix_sign(&mut c1);
    let mut deflated = cov.clone();
    for i in 0..d {
        for j in 0..d {
            let v = deflated.get(i, j) - l1 * c1[i] * c1[j];
            deflated.set(i, j, v);
        }
    }
    let (l2, mut c2) = match dominant(&deflated, total)? {
        Some((l, mut v)) if l > 1e-12 * total => {
            let p = dot(&v, &c1);
            v.iter_mut().zip(&c1).for_each(|(x, y)| *x -= p * y);
            normalize(&mut v);
            (l, v)
        }
        _ => (0.0, orthogonal_completion(&c1)),
    };
    fix_sign(&mut c2);
    let mut components = Matrix::zeros(2, d);
    components.row_mut(0).copy_from_slice(&c1);
    components.row_mut(1).copy_from_slice(&c2);
    let mut coords = Matrix::zeros(n, 2);
    let mut centered = vec![0.0; d];
    for (i, r) in vectors.iter_rows().enumerate() {
        centered
            .iter_mut()
            .zip(r)
            .zip(&mean)
            .for_each(|((c, x), m)| *c = x - m);
        coords.set(i, 0, dot(&centered, &c1));
        coords.set(i, 1, dot(&centered, &c2));
    }
    let l2 = l2.max(0.0);
    Ok(Projection {
        coords,
        components,
        mean,
        variances: [l1, l2],
        variance_fractions: [(l1 / total).clamp(0.0, 1.0), (l2 / total).clamp(0.0, 1.0)],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub token: String,
    pub distance: f64,
}

fn spelling_hint<'a>(anchor: &str, tokens: impl Iterator<Item = &'a String>) -> String {
    let mut scored: Vec<(usize, &String)> = tokens
        .map(|t| (strsim::levenshtein(anchor, t), t))
        .collect();
    scored.sort();
    scored
        .iter()
        .take(3)
        .map(|(_, t)| t.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

/// The `n` tokens nearest to `anchor` by cosine distance among parallel
/// `tokens` and `vectors` rows, ascending, ties broken lexicographically.
pub fn neighbors_among(
    tokens: &[String],
    vectors: &Matrix,
    anchor: &str,
    n: usize,
) -> Result<Vec<Neighbor>> {
    let Some(a) = tokens.iter().position(|t| t == anchor) else {
        return Err(Error::Data(format!(
            "anchor `{anchor}` is not in the vocabulary; nearest spellings: {}",
            spelling_hint(anchor, tokens.iter())
        )));
    };
    if n + 1 > tokens.len() {
        return Err(Error::Config(format!(
            "asked for {n} neighbours but only {} other tokens exist",
            tokens.len() - 1
        )));
    }
    let av = vectors.row(a);
    let mut out = tokens
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != a)
        .map(|(i, t)| {
            Ok(Neighbor {
                token: t.clone(),
                distance: cosine_distance(av, vectors.row(i))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|x, y| {
        x.distance
            .total_cmp(&y.distance)
            .then_with(|| x.token.cmp(&y.token))
    });
    out.truncate(n);
    Ok(out)
}

/// Nearest word vectors to `anchor` in a trained model.
pub fn neighbors(model: &EmbeddingModel, anchor: &str, n: usize) -> Result<Vec<Neighbor>> {
    neighbors_among(model.vocab().tokens(), model.word_vectors(), anchor, n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub lower: f64,
    pub upper: f64,
    pub name: String,
}

/// Half-open cosine-distance bands covering `[0, 2]`; the last band also
/// contains 2.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceBands {
    bands: Vec<Band>,
}

impl Default for DistanceBands {
    fn default() -> Self {
        let edges = [
            (0.0, 0.093, "purple"),
            (0.093, 0.21, "pink"),
            (0.21, 0.4, "orange"),
            (0.4, 0.56, "dark_yellow"),
            (0.56, 2.0, "light_yellow"),
        ];
        DistanceBands {
            bands: edges
                .iter()
                .map(|&(lower, upper, name)| Band {
                    lower,
                    upper,
                    name: name.to_string(),
                })
                .collect(),
        }
    }
}

impl DistanceBands {
    /// Bands must be contiguous, start at 0 and end at 2.
    pub fn new(bands: Vec<Band>) -> Result<Self> {
        let ok = !bands.is_empty()
            && bands[0].lower == 0.0
            && bands[bands.len() - 1].upper == 2.0
            && bands.iter().all(|b| b.lower < b.upper)
            && bands.windows(2).all(|w| w[0].upper == w[1].lower);
        if !ok {
            return Err(Error::Config(
                "distance bands must be contiguous and cover [0, 2]".into(),
            ));
        }
        Ok(DistanceBands { bands })
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    /// Name of the band holding `distance`; values outside `[0, 2]` go to
    /// the nearest end band.
    pub fn band(&self, distance: f64) -> &str {
        self.bands
            .iter()
            .find(|b| distance < b.upper)
            .unwrap_or_else(|| self.bands.last().expect("non-empty bands"))
            .name
            .as_str()
    }
}

pub fn band(distance: f64, bands: &DistanceBands) -> &str {
    bands.band(distance)
}

/// Format like C's `%.6g`.
pub fn format_g6(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        trim(&format!("{x:.*}", (5 - exp) as usize))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    DepFeature,
    LexiconMarker,
    Pronoun,
}

impl TokenKind {
    pub fn of(token: &str, pronouns: &PronounConfig) -> TokenKind {
        if token.starts_with("<lex_") && token.ends_with('>') {
            TokenKind::LexiconMarker
        } else if feature_relation(token).is_some() {
            TokenKind::DepFeature
        } else if pronouns.is_pronoun(token) {
            TokenKind::Pronoun
        } else {
            TokenKind::Word
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TokenKind::Word => "word",
            TokenKind::DepFeature => "dep_feature",
            TokenKind::LexiconMarker => "lexicon_marker",
            TokenKind::Pronoun => "pronoun",
        }
    }
}

pub const METADATA_HEADER: &str = "token\tkind\tdistance_to_anchor\tband";

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorFiles {
    pub vectors: PathBuf,
    pub metadata: PathBuf,
    pub rows: usize,
}

/// Write `vectors.tsv` and `metadata.tsv` into `dir`, one vocabulary token
/// per line in vocabulary order.
pub fn export_projector(
    model: &EmbeddingModel,
    anchor: &str,
    pronouns: &PronounConfig,
    bands: &DistanceBands,
    dir: &Path,
) -> Result<ProjectorFiles> {
    let tokens = model.vocab().tokens();
    let words = model.word_vectors();
    let Some(a) = model.vocab().get(anchor) else {
        return Err(Error::Data(format!(
            "anchor `{anchor}` is not in the vocabulary; nearest spellings: {}",
            spelling_hint(anchor, tokens.iter())
        )));
    };
    let files = ProjectorFiles {
        vectors: dir.join("vectors.tsv"),
        metadata: dir.join("metadata.tsv"),
        rows: tokens.len(),
    };
    let mut vec_out = BufWriter::new(File::create(&files.vectors)?);
    let mut meta_out = BufWriter::new(File::create(&files.metadata)?);
    writeln!(meta_out, "{METADATA_HEADER}")?;
    for (i, token) in tokens.iter().enumerate() {
        let row: Vec<String> = words.row(i).iter().map(|&x| format_g6(x)).collect();
        writeln!(vec_out, "{}", row.join("\t"))?;
        let d = cosine_distance(words.row(a), words.row(i))?;
        writeln!(
            meta_out,
            "{}\t{}\t{:.8}\t{}",
            token,
            TokenKind::of(token, pronouns).as_str(),
            d,
            bands.band(d)
        )?;
    }
    vec_out.flush()?;
    meta_out.flush()?;
    Ok(files)
}
