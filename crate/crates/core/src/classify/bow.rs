use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BowConfig {
    pub n_min: usize,
    pub n_max: usize,
    /// Cap applied separately to word and to dependency n-grams.
    pub max_features: usize,
    pub hateful_terms: Vec<String>,
}

impl Default for BowConfig {
    fn default() -> Self {
        BowConfig {
            n_min: 1,
            n_max: 5,
            max_features: 2000,
            hateful_terms: Vec::new(),
        }
    }
}

impl BowConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(Error::Config(format!(
                "bad n-gram range {}..{}",
                self.n_min, self.n_max
            )));
        }
        if self.max_features == 0 {
            return Err(Error::Config("max_features must be at least 1".into()));
        }
        Ok(())
    }
}

fn ngrams<'a>(
    tokens: &'a [String],
    n_min: usize,
    n_max: usize,
) -> impl Iterator<Item = String> + 'a {
    (n_min..=n_max).flat_map(move |n| tokens.windows(n).map(|w| w.join(" ")))
}

fn top_by_frequency<S: AsRef<[String]>>(docs: &[S], cfg: &BowConfig) -> Vec<String> {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for d in docs {
        for g in ngrams(d.as_ref(), cfg.n_min, cfg.n_max) {
            *counts.entry(g).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(cfg.max_features);
    let mut kept: Vec<String> = ranked.into_iter().map(|(g, _)| g).collect();
    kept.sort();
    kept
}

fn index_of(names: &[String]) -> HashMap<String, usize> {
    names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i))
        .collect()
}

/// Term-frequency n-gram featurizer with optional dependency n-grams and
/// binary hateful-term indicators.
///
/// Column order: word n-grams, then dependency n-grams (named `dep:...`),
/// then terms (named `term:...`), each block sorted lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct BowFeaturizer {
    config: BowConfig,
    words: Vec<String>,
    deps: Vec<String>,
    terms: Vec<String>,
    word_index: HashMap<String, usize>,
    dep_index: HashMap<String, usize>,
}

impl BowFeaturizer {
    pub fn fit<S: AsRef<[String]>, D: AsRef<[String]>>(
        docs: &[S],
        deps: Option<&[D]>,
        config: &BowConfig,
    ) -> Result<Self> {
        config.validate()?;
        if docs.is_empty() {
            return Err(Error::Data(
                "bag-of-n-grams needs a non-empty corpus".into(),
            ));
        }
        let words = top_by_frequency(docs, config);
        let deps = deps.map_or_else(Vec::new, |d| top_by_frequency(d, config));
        let terms: Vec<String> = config
            .hateful_terms
            .iter()
            .map(|t| t.to_lowercase())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Ok(BowFeaturizer {
            word_index: index_of(&words),
            dep_index: index_of(&deps),
            config: config.clone(),
            words,
            deps,
            terms,
        })
    }

    pub fn dim(&self) -> usize {
        self.words.len() + self.deps.len() + self.terms.len()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.words
            .iter()
            .cloned()
            .chain(self.deps.iter().map(|d| format!("dep:{d}")))
            .chain(self.terms.iter().map(|t| format!("term:{t}")))
            .collect()
    }

    pub fn transform(&self, tokens: &[String], deps: Option<&[String]>) -> Vec<f64> {
        let c = &self.config;
        let mut row = vec![0.0; self.dim()];
        for g in ngrams(tokens, c.n_min, c.n_max) {
            if let Some(&i) = self.word_index.get(&g) {
                row[i] += 1.0;
            }
        }
        let off = self.words.len();
        if let Some(deps) = deps {
            for g in ngrams(deps, c.n_min, c.n_max) {
                if let Some(&i) = self.dep_index.get(&g) {
                    row[off + i] += 1.0;
                }
            }
        }
        let off = off + self.deps.len();
        for (j, term) in self.terms.iter().enumerate() {
            let parts: Vec<&str> = term.split_whitespace().collect();
            let hit = !parts.is_empty()
                && tokens
                    .windows(parts.len())
                    .any(|w| w.iter().zip(&parts).all(|(a, b)| a == b));
            if hit {
                row[off + j] = 1.0;
            }
        }
        row
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BowMatrix {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Fit on `docs` and transform them.
pub fn bow_features<S: AsRef<[String]>, D: AsRef<[String]>>(
    docs: &[S],
    deps: Option<&[D]>,
    config: &BowConfig,
) -> Result<BowMatrix> {
    let f = BowFeaturizer::fit(docs, deps, config)?;
    let rows = docs
        .iter()
        .enumerate()
        .map(|(i, d)| f.transform(d.as_ref(), deps.map(|ds| ds[i].as_ref())))
        .collect();
    Ok(BowMatrix {
        names: f.feature_names(),
        rows,
    })
}

/// One term per line; blank lines and `#` comments are skipped.
pub fn load_terms<R: BufRead>(reader: R) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let t = line.trim();
        if !t.is_empty() && !t.starts_with('#') {
            out.push(t.to_lowercase());
        }
    }
    Ok(out)
}
