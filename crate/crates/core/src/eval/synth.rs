use std::collections::BTreeSet;
use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{Dataset, Document, Label, PronounConfig};
use crate::error::{Error, Result};
use crate::parse::{feature_relation, heuristic_parse, ParseGraph};

/// Verbs used in the planted motif.
pub const ACTION_VERBS: &[&str] = &[
    "send", "deport", "ban", "expel", "remove", "kick", "attack", "destroy", "hate", "stop",
    "invade", "purge", "banish", "eject", "exile",
];

/// Verbs for one-sided filler clauses.
pub const NEUTRAL_VERBS: &[&str] = &[
    "see", "like", "know", "think", "need", "keep", "make", "get", "bring", "love", "give", "tell",
];

const DETERMINERS: &[&str] = &["the", "a", "this", "that"];
const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticSpec {
    pub n_docs: usize,
    /// Fraction of documents labelled hateful.
    pub hateful_fraction: f64,
    /// Motif planting probability in hateful documents.
    pub p1: f64,
    /// Motif planting probability in non-hateful documents.
    pub p0: f64,
    /// Shared filler nouns.
    pub filler_vocab: usize,
    /// Nouns specific to each class.
    pub topic_vocab: usize,
    /// Probability that a filler noun comes from the document's class list.
    pub topic_rate: f64,
    /// Probability of a one-sided pronoun clause in an unplanted document.
    pub clause_rate: f64,
    /// Probability that a one-sided clause uses an action verb.
    pub clause_action_rate: f64,
    pub min_len: usize,
    pub max_len: usize,
    /// Place the motif as the final clause instead of at a random offset.
    pub motif_at_end: bool,
    /// Seed for the pseudo-word inventory. Corpora sharing it share
    /// their vocabulary.
    pub vocab_seed: u64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_docs: 1000,
            hateful_fraction: 0.5,
            p1: 0.8,
            p0: 0.05,
            filler_vocab: 300,
            topic_vocab: 30,
            topic_rate: 0.4,
            clause_rate: 0.3,
            clause_action_rate: 0.5,
            min_len: 8,
            max_len: 14,
            motif_at_end: true,
            vocab_seed: 0,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(0.0 <= self.p0 && self.p0 < self.p1 && self.p1 <= 1.0) {
            return Err(Error::Config(format!(
                "planting probabilities need 0 <= p0 < p1 <= 1 (got p0={}, p1={})",
                self.p0, self.p1
            )));
        }
        if !unit(self.hateful_fraction)
            || !unit(self.topic_rate)
            || !unit(self.clause_rate)
            || !unit(self.clause_action_rate)
        {
            return Err(Error::Config("synthetic rates must lie in [0, 1]".into()));
        }
        if self.n_docs == 0 || self.filler_vocab == 0 || self.min_len == 0 {
            return Err(Error::Config(
                "n_docs, filler_vocab and min_len must be positive".into(),
            ));
        }
        if self.min_len > self.max_len {
            return Err(Error::Config("min_len exceeds max_len".into()));
        }
        if self.topic_rate > 0.0 && self.topic_vocab == 0 {
            return Err(Error::Config("topic_rate > 0 needs topic_vocab > 0".into()));
        }
        Ok(())
    }

    /// Read `key = value` lines over the field names; unset keys keep
    /// their defaults.
    pub fn from_key_values<R: BufRead>(reader: R) -> Result<Self> {
        let mut s = SyntheticSpec::default();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (k, v) = t
                .split_once('=')
                .ok_or_else(|| Error::format("synthetic spec", n + 1, "expected key = value"))?;
            let (k, v) = (k.trim(), v.trim());
            let bad = |_| Error::format("synthetic spec", n + 1, format!("bad value for {k}"));
            match k {
                "n_docs" => s.n_docs = v.parse().map_err(bad)?,
                "filler_vocab" => s.filler_vocab = v.parse().map_err(bad)?,
                "topic_vocab" => s.topic_vocab = v.parse().map_err(bad)?,
                "min_len" => s.min_len = v.parse().map_err(bad)?,
                "max_len" => s.max_len = v.parse().map_err(bad)?,
                "seed" => s.seed = v.parse().map_err(bad)?,
                "motif_at_end" => {
                    s.motif_at_end = v.parse().map_err(|_| {
                        Error::format(
                            "synthetic spec",
                            n + 1,
                            "motif_at_end must be true or false",
                        )
                    })?
                }
                "vocab_seed" => s.vocab_seed = v.parse().map_err(bad)?,
                _ => {
                    let x: f64 = v.parse().map_err(|_| {
                        Error::format("synthetic spec", n + 1, format!("bad value for {k}"))
                    })?;
                    match k {
                        "hateful_fraction" => s.hateful_fraction = x,
                        "p1" => s.p1 = x,
                        "p0" => s.p0 = x,
                        "topic_rate" => s.topic_rate = x,
                        "clause_rate" => s.clause_rate = x,
                        "clause_action_rate" => s.clause_action_rate = x,
                        _ => {
                            return Err(Error::format(
                                "synthetic spec",
                                n + 1,
                                format!("unknown key {k}"),
                            ))
                        }
                    }
                }
            }
        }
        s.validate()?;
        Ok(s)
    }
}

/// A generated corpus with its parses and ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub dataset: Dataset,
    /// One heuristic parse per document, in dataset order.
    pub parses: Vec<ParseGraph>,
    /// Whether the motif was planted, in dataset order.
    pub planted: Vec<bool>,
}

impl SyntheticCorpus {
    /// Tokens the motif introduces beyond the ingroup pronouns: outgroup
    /// pronouns and action verbs.
    pub fn motif_tokens() -> BTreeSet<String> {
        ["they", "them"]
            .iter()
            .chain(ACTION_VERBS)
            .map(|s| s.to_string())
            .collect()
    }

    /// A motif word, or a dependency-pair or lexicon-marker token with a
    /// motif word among its components.
    pub fn is_motif_token(token: &str) -> bool {
        let motif = Self::motif_tokens();
        if motif.contains(token) {
            return true;
        }
        let derived = token.starts_with("<lex_") || feature_relation(token).is_some();
        derived
            && token
                .split(['(', ')', ',', ':', '<', '>'])
                .any(|part| motif.contains(part))
    }
}

fn pseudo_words(n: usize, taken: &mut BTreeSet<String>, rng: &mut ChaCha8Rng) -> Vec<String> {
    let pronouns = PronounConfig::default();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let syllables = rng.gen_range(2..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push(*CONSONANTS.choose(rng).expect("consonants") as char);
            w.push(*VOWELS.choose(rng).expect("vowels") as char);
        }
        // a trailing consonant keeps the heuristic tagger's suffix rules quiet
        w.push(*b"mnrt".choose(rng).expect("codas") as char);
        if !pronouns.is_pronoun(&w) && taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

struct Lexis {
    shared: Vec<String>,
    topical: [Vec<String>; 2],
}

impl Lexis {
    fn noun(&self, label: Label, spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> String {
        let list = if rng.gen_bool(spec.topic_rate) {
            &self.topical[label.as_u8() as usize]
        } else {
            &self.shared
        };
        list.choose(rng).expect("non-empty vocabulary").clone()
    }

    fn noun_phrase(&self, label: Label, spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> Vec<String> {
        let mut out = Vec::with_capacity(2);
        if rng.gen_bool(0.5) {
            out.push(DETERMINERS.choose(rng).expect("determiners").to_string());
        }
        out.push(self.noun(label, spec, rng));
        out
    }
}

fn pick(words: &[&str], rng: &mut ChaCha8Rng) -> String {
    words.choose(rng).expect("non-empty list").to_string()
}

/// Generate a labelled corpus in which an ingroup pronoun, action verb and
/// outgroup pronoun motif (`we <verb> them` or `they <verb> us`) is planted
/// in hateful documents with probability `p1` and in non-hateful ones with
/// probability `p0`.
///
/// Unplanted documents may carry a clause with pronouns from one side only,
/// so that no unplanted document is two-sided.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let mut vocab_rng = ChaCha8Rng::seed_from_u64(spec.vocab_seed);
    let mut taken = BTreeSet::new();
    let lexis = Lexis {
        shared: pseudo_words(spec.filler_vocab, &mut taken, &mut vocab_rng),
        topical: [
            pseudo_words(spec.topic_vocab, &mut taken, &mut vocab_rng),
            pseudo_words(spec.topic_vocab, &mut taken, &mut vocab_rng),
        ],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n_hate = (spec.n_docs as f64 * spec.hateful_fraction).round() as usize;
    let mut labels: Vec<Label> = (0..spec.n_docs)
        .map(|i| {
            if i < n_hate {
                Label::Hateful
            } else {
                Label::NonHateful
            }
        })
        .collect();
    labels.shuffle(&mut rng);

    let width = spec.n_docs.to_string().len();
    let mut docs = Vec::with_capacity(spec.n_docs);
    let mut parses = Vec::with_capacity(spec.n_docs);
    let mut planted = Vec::with_capacity(spec.n_docs);
    for (i, &label) in labels.iter().enumerate() {
        let p = if label.is_hateful() { spec.p1 } else { spec.p0 };
        let plant = rng.gen_bool(p);
        let target = rng.gen_range(spec.min_len..=spec.max_len);
        let clause: Vec<String> = if plant {
            let verb = pick(ACTION_VERBS, &mut rng);
            if rng.gen_bool(0.5) {
                vec!["we".into(), verb, "them".into()]
            } else {
                vec!["they".into(), verb, "us".into()]
            }
        } else if rng.gen_bool(spec.clause_rate) {
            let verb = if rng.gen_bool(spec.clause_action_rate) {
                pick(ACTION_VERBS, &mut rng)
            } else {
                pick(NEUTRAL_VERBS, &mut rng)
            };
            let subject = if rng.gen_bool(0.5) { "we" } else { "they" };
            let mut c = vec![subject.to_string(), verb];
            c.extend(lexis.noun_phrase(label, spec, &mut rng));
            c
        } else {
            Vec::new()
        };
        let mut tokens = Vec::with_capacity(target + 4);
        let last = target.saturating_sub(clause.len());
        let at = if plant && spec.motif_at_end {
            last
        } else {
            rng.gen_range(0..=last)
        };
        while tokens.len() < at {
            tokens.extend(lexis.noun_phrase(label, spec, &mut rng));
        }
        tokens.extend(clause);
        while tokens.len() < target {
            tokens.extend(lexis.noun_phrase(label, spec, &mut rng));
        }
        let id = format!("syn{:0width$}", i);
        let doc = Document::new(id.clone(), tokens.join(" "), Some(label));
        parses.push(heuristic_parse(&id, &doc.tokens)?);
        docs.push(doc);
        planted.push(plant);
    }
    Ok(SyntheticCorpus {
        dataset: Dataset::new(format!("synthetic-{}", spec.seed), docs)?,
        parses,
        planted,
    })
}
