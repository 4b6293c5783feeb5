//! The othering lexicon and token-stream augmentation.
//!
//! A lexicon is a triple of (dependency-pair features, content words,
//! pronouns) collected from hateful documents that use pronouns on both
//! sides of an us/them divide. Augmentation appends a document's own
//! dependency-pair tokens and one typed marker token per lexicon match to
//! its surface tokens, so that the embedding layer sees the othering
//! features as vocabulary items of their own.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{Read, Write};

use sha2::{Digest, Sha256};

use crate::corpus::{is_two_sided, Dataset, Document, Label, PronounConfig, TwoSidedMode};
use crate::error::{Error, Result};
use crate::parse::{
    feature_relation, filter_dependencies_with, filter_pos_with, FeatureForm, ParseGraph, ParseMap,
};

pub const DEP_MARKER: &str = "lex_dep";
pub const WORD_MARKER: &str = "lex_word";
pub const PRONOUN_MARKER: &str = "lex_pron";

/// Options for [`build_lexicon`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconConfig {
    pub mode: TwoSidedMode,
    pub form: FeatureForm,
    /// Entries seen in fewer kept documents' outputs than this are dropped.
    pub min_count: usize,
}

impl Default for LexiconConfig {
    fn default() -> Self {
        LexiconConfig {
            mode: TwoSidedMode::IngroupOutgroup,
            form: FeatureForm::Surface,
            min_count: 1,
        }
    }
}

impl LexiconConfig {
    fn hash(&self, pronouns: &PronounConfig) -> String {
        let mut h = Sha256::new();
        h.update(format!(
            "mode={};form={:?};min_count={};",
            self.mode, self.form, self.min_count
        ));
        for side in [
            pronouns.ingroup(),
            pronouns.outgroup(),
            pronouns.all_pronouns(),
        ] {
            for p in side {
                h.update(p.as_bytes());
                h.update(b",");
            }
            h.update(b";");
        }
        hex::encode(&h.finalize()[..8])
    }
}

/// Where a lexicon came from.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Provenance {
    pub source: String,
    pub config_hash: String,
    pub mode: String,
    pub form: String,
    pub min_count: usize,
    pub input_docs: usize,
    pub kept_docs: usize,
    pub dep_count: usize,
    pub word_count: usize,
    pub pronoun_count: usize,
    /// Set when the lexicon was built from no hateful input at all.
    pub empty_input: bool,
    /// Root seed of the run that wrote the lexicon.
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OtheringLexicon {
    dep_entries: BTreeSet<String>,
    pos_words: BTreeSet<String>,
    pronouns: BTreeSet<String>,
    provenance: Provenance,
}

impl OtheringLexicon {
    /// Assemble a lexicon from its parts. Dependency entries must be
    /// `rel(head,dep)` strings over the six retained relations; content
    /// words that are also pronouns are dropped so the parts stay disjoint.
    pub fn new(
        dep_entries: BTreeSet<String>,
        pos_words: BTreeSet<String>,
        pronouns: BTreeSet<String>,
        mut provenance: Provenance,
    ) -> Result<Self> {
        if let Some(bad) = dep_entries.iter().find(|e| feature_relation(e).is_none()) {
            return Err(Error::Data(format!(
                "lexicon dependency entry `{bad}` is not a retained relation"
            )));
        }
        let pos_words: BTreeSet<String> = pos_words
            .into_iter()
            .filter(|w| !pronouns.contains(w) && !dep_entries.contains(w))
            .collect();
        provenance.dep_count = dep_entries.len();
        provenance.word_count = pos_words.len();
        provenance.pronoun_count = pronouns.len();
        Ok(OtheringLexicon {
            dep_entries,
            pos_words,
            pronouns,
            provenance,
        })
    }

    /// Record the run seed in the provenance.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.provenance.seed = seed;
        self
    }

    pub fn dep_entries(&self) -> &BTreeSet<String> {
        &self.dep_entries
    }

    pub fn pos_words(&self) -> &BTreeSet<String> {
        &self.pos_words
    }

    pub fn pronouns(&self) -> &BTreeSet<String> {
        &self.pronouns
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn is_empty(&self) -> bool {
        self.dep_entries.is_empty() && self.pos_words.is_empty() && self.pronouns.is_empty()
    }
}

fn check_pair(doc: &Document, parse: &ParseGraph) -> Result<()> {
    if doc.id != parse.doc_id() {
        return Err(Error::IdMismatch {
            doc: doc.id.clone(),
            parse: parse.doc_id().to_string(),
        });
    }
    Ok(())
}

/// Build a lexicon from hateful documents and their parses.
///
/// Documents that are not two-sided under `config.mode` are discarded. The
/// dependency part is the union of the kept documents' retained dependency
/// pairs, the word part the union of their NN/JJ/VB/RB words, and the
/// pronoun part is always the full pronoun inventory.
pub fn build_lexicon(
    source: &str,
    hateful: &[(&Document, &ParseGraph)],
    pronouns: &PronounConfig,
    config: &LexiconConfig,
) -> Result<OtheringLexicon> {
    let mut deps: BTreeMap<String, usize> = BTreeMap::new();
    let mut words: BTreeMap<String, usize> = BTreeMap::new();
    let mut kept = 0;
    for (doc, parse) in hateful {
        if doc.label != Some(Label::Hateful) {
            return Err(Error::Data(format!(
                "lexicon input `{}` is not labeled hateful",
                doc.id
            )));
        }
        check_pair(doc, parse)?;
        if !is_two_sided(doc, pronouns, config.mode) {
            continue;
        }
        kept += 1;
        for pair in filter_dependencies_with(parse, config.form) {
            *deps.entry(pair.feature()).or_insert(0) += 1;
        }
        for word in filter_pos_with(parse, config.form) {
            *words.entry(word).or_insert(0) += 1;
        }
    }
    let min = config.min_count.max(1);
    let keep = |m: BTreeMap<String, usize>| -> BTreeSet<String> {
        m.into_iter()
            .filter(|&(_, c)| c >= min)
            .map(|(k, _)| k)
            .collect()
    };
    let provenance = Provenance {
        source: source.to_string(),
        config_hash: config.hash(pronouns),
        mode: config.mode.to_string(),
        form: format!("{:?}", config.form).to_lowercase(),
        min_count: min,
        input_docs: hateful.len(),
        kept_docs: kept,
        empty_input: hateful.is_empty(),
        ..Provenance::default()
    };
    OtheringLexicon::new(
        keep(deps),
        keep(words),
        pronouns.all_pronouns().clone(),
        provenance,
    )
}

/// Build a lexicon from the hateful documents of a dataset.
pub fn build_lexicon_from_dataset(
    dataset: &Dataset,
    parses: &ParseMap,
    pronouns: &PronounConfig,
    config: &LexiconConfig,
) -> Result<OtheringLexicon> {
    let mut pairs = Vec::new();
    for doc in dataset.documents() {
        if doc.label == Some(Label::Hateful) {
            let parse = parses
                .get(&doc.id)
                .ok_or_else(|| Error::MissingParse(doc.id.clone()))?;
            pairs.push((doc, parse));
        }
    }
    build_lexicon(dataset.name(), &pairs, pronouns, config)
}

/// A document's token stream split into its three parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedDocument {
    pub doc_id: String,
    pub base_tokens: Vec<String>,
    pub feature_tokens: Vec<String>,
    pub lexicon_hits: Vec<String>,
}

impl AugmentedDocument {
    /// Surface tokens only.
    pub fn plain(doc: &Document) -> Self {
        AugmentedDocument {
            doc_id: doc.id.clone(),
            base_tokens: doc.tokens.clone(),
            feature_tokens: Vec::new(),
            lexicon_hits: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.base_tokens.len() + self.feature_tokens.len() + self.lexicon_hits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `base ++ features ++ hits`, the stream fed to the embedding layer.
    pub fn stream(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.len());
        out.extend_from_slice(&self.base_tokens);
        out.extend_from_slice(&self.feature_tokens);
        out.extend_from_slice(&self.lexicon_hits);
        out
    }
}

/// Options for [`augment`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AugmentOptions {
    /// Emit the document's own dependency-pair tokens.
    pub emit_features: bool,
    pub form: FeatureForm,
}

impl Default for AugmentOptions {
    fn default() -> Self {
        AugmentOptions {
            emit_features: true,
            form: FeatureForm::Surface,
        }
    }
}

pub fn marker(kind: &str, entry: &str) -> String {
    format!("<{kind}:{entry}>")
}

/// Extend a document's tokens with dependency-pair features and lexicon
/// hit markers.
///
/// Hits are grouped by lexicon part: dependency hits (over the document's
/// dependency pairs), then word hits and pronoun hits (over the surface
/// tokens), each in encounter order.
pub fn augment(
    doc: &Document,
    parse: &ParseGraph,
    lexicon: &OtheringLexicon,
    options: &AugmentOptions,
) -> Result<AugmentedDocument> {
    check_pair(doc, parse)?;
    let pairs: Vec<String> = filter_dependencies_with(parse, options.form)
        .iter()
        .map(|p| p.feature())
        .collect();
    let mut hits = Vec::new();
    hits.extend(
        pairs
            .iter()
            .filter(|f| lexicon.dep_entries.contains(*f))
            .map(|f| marker(DEP_MARKER, f)),
    );
    hits.extend(
        doc.tokens
            .iter()
            .filter(|t| lexicon.pos_words.contains(*t))
            .map(|t| marker(WORD_MARKER, t)),
    );
    hits.extend(
        doc.tokens
            .iter()
            .filter(|t| lexicon.pronouns.contains(*t))
            .map(|t| marker(PRONOUN_MARKER, t)),
    );
    Ok(AugmentedDocument {
        doc_id: doc.id.clone(),
        base_tokens: doc.tokens.clone(),
        feature_tokens: if options.emit_features {
            pairs
        } else {
            Vec::new()
        },
        lexicon_hits: hits,
    })
}

/// Write the sectioned text form: `[meta]` key=value lines, then `[dep]`,
/// `[word]` and `[pronoun]` with one entry per line.
pub fn save_lexicon<W: Write>(lexicon: &OtheringLexicon, mut sink: W) -> Result<()> {
    let p = &lexicon.provenance;
    let mut out = String::from("# othering lexicon\n[meta]\n");
    for (k, v) in [
        ("source", p.source.clone()),
        ("config_hash", p.config_hash.clone()),
        ("mode", p.mode.clone()),
        ("form", p.form.clone()),
        ("min_count", p.min_count.to_string()),
        ("input_docs", p.input_docs.to_string()),
        ("kept_docs", p.kept_docs.to_string()),
        ("dep_count", p.dep_count.to_string()),
        ("word_count", p.word_count.to_string()),
        ("pronoun_count", p.pronoun_count.to_string()),
        ("empty_input", p.empty_input.to_string()),
        ("seed", p.seed.to_string()),
    ] {
        let _ = writeln!(out, "{k}={v}");
    }
    for (section, entries) in [
        ("dep", &lexicon.dep_entries),
        ("word", &lexicon.pos_words),
        ("pronoun", &lexicon.pronouns),
    ] {
        let _ = writeln!(out, "\n[{section}]");
        for e in entries {
            out.push_str(e);
            out.push('\n');
        }
    }
    sink.write_all(out.as_bytes())?;
    sink.flush()?;
    Ok(())
}

pub fn load_lexicon<R: Read>(mut source: R) -> Result<OtheringLexicon> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;

    #[derive(Clone, Copy, PartialEq)]
    enum Section {
        Meta,
        Dep,
        Word,
        Pronoun,
    }
    let mut section = None;
    let mut seen = [false; 4];
    let mut deps = BTreeSet::new();
    let mut words = BTreeSet::new();
    let mut pronouns = BTreeSet::new();
    let mut prov = Provenance::default();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            let s = match line {
                "[meta]" => Section::Meta,
                "[dep]" => Section::Dep,
                "[word]" => Section::Word,
                "[pronoun]" => Section::Pronoun,
                other => {
                    return Err(Error::format(
                        "lexicon",
                        line_no,
                        format!("unknown section {other}"),
                    ))
                }
            };
            seen[s as usize] = true;
            section = Some(s);
            continue;
        }
        let bad = |msg: String| Error::format("lexicon", line_no, msg);
        match section {
            None => return Err(bad("entry before any section".into())),
            Some(Section::Meta) => {
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| bad(format!("expected key=value, got `{line}`")))?;
                let num = |v: &str| {
                    v.parse::<usize>()
                        .map_err(|_| bad(format!("`{key}` must be an integer")))
                };
                match key.trim() {
                    "source" => prov.source = value.to_string(),
                    "config_hash" => prov.config_hash = value.to_string(),
                    "mode" => prov.mode = value.to_string(),
                    "form" => prov.form = value.to_string(),
                    "min_count" => prov.min_count = num(value)?,
                    "input_docs" => prov.input_docs = num(value)?,
                    "kept_docs" => prov.kept_docs = num(value)?,
                    "dep_count" | "word_count" | "pronoun_count" => {}
                    "seed" => {
                        prov.seed = value
                            .parse()
                            .map_err(|_| bad("`seed` must be an unsigned integer".into()))?
                    }
                    "empty_input" => {
                        prov.empty_input = value
                            .parse()
                            .map_err(|_| bad("`empty_input` must be true or false".into()))?
                    }
                    other => return Err(bad(format!("unknown meta key `{other}`"))),
                }
            }
            Some(Section::Dep) => {
                if feature_relation(line).is_none() {
                    return Err(bad(format!(
                        "`{line}` is not a rel(head,dep) entry over a retained relation"
                    )));
                }
                deps.insert(line.to_string());
            }
            Some(Section::Word) => {
                words.insert(line.to_string());
            }
            Some(Section::Pronoun) => {
                pronouns.insert(line.to_string());
            }
        }
    }
    for (s, name) in [
        (Section::Dep, "dep"),
        (Section::Word, "word"),
        (Section::Pronoun, "pronoun"),
    ] {
        if !seen[s as usize] {
            return Err(Error::format(
                "lexicon",
                text.lines().count(),
                format!("missing section [{name}]"),
            ));
        }
    }
    OtheringLexicon::new(deps, words, pronouns, prov)
}
