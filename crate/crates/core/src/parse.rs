//! Typed-dependency parses: CoNLL-U ingestion, relation and POS filtering,
//! and a rule-based fallback parser for fixtures and synthetic corpora.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};

/// The dependency relations that carry othering features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    Nsubj,
    Dobj,
    Nmod,
    Det,
    Advmod,
    Compound,
}

impl Relation {
    pub const ALL: [Relation; 6] = [
        Relation::Nsubj,
        Relation::Dobj,
        Relation::Nmod,
        Relation::Det,
        Relation::Advmod,
        Relation::Compound,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Nsubj => "nsubj",
            Relation::Dobj => "dobj",
            Relation::Nmod => "nmod",
            Relation::Det => "det",
            Relation::Advmod => "advmod",
            Relation::Compound => "compound",
        }
    }

    /// Map a raw dependency label onto a retained relation.
    ///
    /// The label is lowercased and truncated at the first `:` so that
    /// subtypes such as `nmod:poss` fall under their base relation. The
    /// Universal Dependencies `obj` is read as `dobj`.
    pub fn normalize(deprel: &str) -> Option<Relation> {
        let lower = deprel.to_ascii_lowercase();
        let base = lower.split(':').next().unwrap_or("");
        match base {
            "nsubj" => Some(Relation::Nsubj),
            "dobj" | "obj" => Some(Relation::Dobj),
            "nmod" => Some(Relation::Nmod),
            "det" => Some(Relation::Det),
            "advmod" => Some(Relation::Advmod),
            "compound" => Some(Relation::Compound),
            _ => None,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Relation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Relation::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::Data(format!("`{s}` is not a retained relation")))
    }
}

/// Where a parse came from. Heuristic parses are only meant for fixtures
/// and synthetic corpora.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseSource {
    Conllu,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseToken {
    /// 1-based position in the document.
    pub index: usize,
    pub form: String,
    pub lemma: String,
    /// Universal POS tag as read, or derived from `pos` for heuristic parses.
    pub upos: String,
    /// Penn-style tag (`NN`, `VBD`, `PRP`, ...).
    pub pos: String,
    /// Governor index, 0 for the root.
    pub head: usize,
    pub deprel: String,
}

/// The parse of one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseGraph {
    doc_id: String,
    tokens: Vec<ParseToken>,
    source: ParseSource,
}

impl ParseGraph {
    pub fn new(
        doc_id: impl Into<String>,
        tokens: Vec<ParseToken>,
        source: ParseSource,
    ) -> Result<Self> {
        let doc_id = doc_id.into();
        let n = tokens.len();
        for (i, t) in tokens.iter().enumerate() {
            if t.index != i + 1 {
                return Err(Error::Data(format!(
                    "parse `{doc_id}`: token {} has index {}",
                    i + 1,
                    t.index
                )));
            }
            if t.head > n || t.head == t.index {
                return Err(Error::Data(format!(
                    "parse `{doc_id}`: token {} has invalid head {}",
                    t.index, t.head
                )));
            }
        }
        if n > 0 && !tokens.iter().any(|t| t.head == 0) {
            return Err(Error::Data(format!("parse `{doc_id}` has no root")));
        }
        Ok(ParseGraph {
            doc_id,
            tokens,
            source,
        })
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn tokens(&self) -> &[ParseToken] {
        &self.tokens
    }

    pub fn source(&self) -> ParseSource {
        self.source
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    fn head_of(&self, token: &ParseToken) -> Option<&ParseToken> {
        token.head.checked_sub(1).map(|h| &self.tokens[h])
    }
}

/// Parses keyed by document id.
pub type ParseMap = HashMap<String, ParseGraph>;

pub fn index_parses(graphs: Vec<ParseGraph>) -> ParseMap {
    graphs.into_iter().map(|g| (g.doc_id.clone(), g)).collect()
}

/// Which string of a token feeds the feature extractors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum FeatureForm {
    #[default]
    Surface,
    Lemma,
}

impl FeatureForm {
    fn of(self, token: &ParseToken) -> String {
        match self {
            FeatureForm::Surface => token.form.to_lowercase(),
            FeatureForm::Lemma => token.lemma.to_lowercase(),
        }
    }
}

/// A retained head/dependent pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DepPair {
    pub relation: Relation,
    pub head_form: String,
    pub dep_form: String,
}

impl DepPair {
    pub fn new(relation: Relation, head: impl Into<String>, dep: impl Into<String>) -> Self {
        DepPair {
            relation,
            head_form: head.into(),
            dep_form: dep.into(),
        }
    }

    /// The single-token feature string `rel(head,dep)`.
    pub fn feature(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for DepPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{})", self.relation, self.head_form, self.dep_form)
    }
}

/// Retained relation of a feature string `rel(head,dep)`, if it has that
/// shape.
pub fn feature_relation(feature: &str) -> Option<Relation> {
    let (rel, rest) = feature.split_once('(')?;
    if !rest.ends_with(')') || !rest.contains(',') {
        return None;
    }
    rel.parse().ok()
}

pub fn filter_dependencies(graph: &ParseGraph) -> Vec<DepPair> {
    filter_dependencies_with(graph, FeatureForm::Surface)
}

/// Keep the edges whose relation is one of the six retained ones, in
/// dependent order.
pub fn filter_dependencies_with(graph: &ParseGraph, form: FeatureForm) -> Vec<DepPair> {
    graph
        .tokens()
        .iter()
        .filter_map(|t| {
            let relation = Relation::normalize(&t.deprel)?;
            let head = graph
                .head_of(t)
                .map_or_else(|| "root".to_string(), |h| form.of(h));
            Some(DepPair::new(relation, head, form.of(t)))
        })
        .collect()
}

const RETAINED_POS: [&str; 4] = ["NN", "JJ", "VB", "RB"];

pub fn filter_pos(graph: &ParseGraph) -> Vec<String> {
    filter_pos_with(graph, FeatureForm::Surface)
}

/// Words tagged as nouns, adjectives, verbs or adverbs, in sentence order.
pub fn filter_pos_with(graph: &ParseGraph, form: FeatureForm) -> Vec<String> {
    graph
        .tokens()
        .iter()
        .filter(|t| RETAINED_POS.iter().any(|p| t.pos.starts_with(p)))
        .map(|t| form.of(t))
        .collect()
}

fn upos_to_penn(upos: &str) -> &'static str {
    match upos {
        "NOUN" => "NN",
        "PROPN" => "NNP",
        "VERB" | "AUX" => "VB",
        "ADJ" => "JJ",
        "ADV" => "RB",
        "PRON" => "PRP",
        "DET" => "DT",
        "ADP" | "SCONJ" => "IN",
        "CCONJ" => "CC",
        "NUM" => "CD",
        "PART" => "RP",
        "INTJ" => "UH",
        "PUNCT" => ".",
        "SYM" => "SYM",
        "X" => "FW",
        _ => "_",
    }
}

fn penn_to_upos(pos: &str) -> &'static str {
    match pos {
        p if p.starts_with("NNP") => "PROPN",
        p if p.starts_with("NN") => "NOUN",
        "MD" => "AUX",
        p if p.starts_with("VB") => "VERB",
        p if p.starts_with("JJ") => "ADJ",
        p if p.starts_with("RB") => "ADV",
        p if p.starts_with("PRP") => "PRON",
        "DT" => "DET",
        "IN" | "TO" => "ADP",
        "CC" => "CCONJ",
        "CD" => "NUM",
        "." => "PUNCT",
        _ => "X",
    }
}

struct PendingDoc {
    id: String,
    tokens: Vec<ParseToken>,
}

/// Read CoNLL-U, grouping sentences by their `# doc_id = …` comment.
///
/// Sentences following a `doc_id` comment belong to that document until the
/// next one; their indices are renumbered so each document's tokens run
/// 1..n. Multiword-token ranges and empty nodes are skipped. A block that
/// has a `doc_id` but no tokens yields an empty graph.
pub fn read_conllu<R: Read>(source: R) -> Result<Vec<ParseGraph>> {
    let mut graphs = Vec::new();
    let mut seen = HashSet::new();
    let mut current: Option<PendingDoc> = None;
    let mut sentence: Vec<(usize, ParseToken)> = Vec::new();

    let finish_doc = |doc: PendingDoc, graphs: &mut Vec<ParseGraph>| -> Result<()> {
        graphs.push(ParseGraph::new(doc.id, doc.tokens, ParseSource::Conllu)?);
        Ok(())
    };

    for (i, line) in BufReader::new(source).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush_sentence(&mut sentence, current.as_mut())?;
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                if key.trim() == "doc_id" {
                    if !sentence.is_empty() {
                        return Err(Error::format(
                            "conllu",
                            line_no,
                            "doc_id comment inside a sentence",
                        ));
                    }
                    let id = value.trim().to_string();
                    if id.is_empty() || !seen.insert(id.clone()) {
                        return Err(Error::format(
                            "conllu",
                            line_no,
                            format!("empty or repeated doc_id `{id}`"),
                        ));
                    }
                    if let Some(doc) = current.take() {
                        finish_doc(doc, &mut graphs)?;
                    }
                    current = Some(PendingDoc {
                        id,
                        tokens: Vec::new(),
                    });
                }
            }
            continue;
        }

        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::format(
                "conllu",
                line_no,
                format!("expected 10 tab-separated columns, found {}", cols.len()),
            ));
        }
        if current.is_none() {
            return Err(Error::format(
                "conllu",
                line_no,
                "sentence is not bound to a document (missing `# doc_id = …`)",
            ));
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let index: usize = cols[0].parse().map_err(|_| {
            Error::format("conllu", line_no, format!("non-integer id `{}`", cols[0]))
        })?;
        let head: usize = cols[6].parse().map_err(|_| {
            Error::format("conllu", line_no, format!("non-integer head `{}`", cols[6]))
        })?;
        let form = cols[1].to_string();
        let lemma = if cols[2] == "_" {
            form.to_lowercase()
        } else {
            cols[2].to_string()
        };
        let upos = cols[3].to_string();
        let pos = if cols[4] == "_" {
            upos_to_penn(&upos).to_string()
        } else {
            cols[4].to_string()
        };
        let deprel = match cols[7] {
            "obj" => "dobj".to_string(),
            d => match d.strip_prefix("obj:") {
                Some(sub) => format!("dobj:{sub}"),
                None => d.to_string(),
            },
        };
        sentence.push((
            line_no,
            ParseToken {
                index,
                form,
                lemma,
                upos,
                pos,
                head,
                deprel,
            },
        ));
    }
    flush_sentence(&mut sentence, current.as_mut())?;
    if let Some(doc) = current.take() {
        finish_doc(doc, &mut graphs)?;
    }
    Ok(graphs)
}

fn flush_sentence(
    sentence: &mut Vec<(usize, ParseToken)>,
    doc: Option<&mut PendingDoc>,
) -> Result<()> {
    if sentence.is_empty() {
        return Ok(());
    }
    let doc = doc.expect("token lines are only accepted inside a document");
    let n = sentence.len();
    let offset = doc.tokens.len();
    let mut has_root = false;
    for (i, (line_no, token)) in sentence.iter().enumerate() {
        if token.index != i + 1 {
            return Err(Error::format(
                "conllu",
                *line_no,
                format!("token ids must run 1..{n}, found {}", token.index),
            ));
        }
        if token.head > n || token.head == token.index {
            return Err(Error::format(
                "conllu",
                *line_no,
                format!("invalid head {} for token {}", token.head, token.index),
            ));
        }
        has_root |= token.head == 0;
    }
    if !has_root {
        return Err(Error::format(
            "conllu",
            sentence[n - 1].0,
            "sentence has no root",
        ));
    }
    for (_, mut token) in sentence.drain(..) {
        token.index += offset;
        if token.head != 0 {
            token.head += offset;
        }
        doc.tokens.push(token);
    }
    Ok(())
}

/// Write one sentence block per graph, each preceded by its `doc_id`.
pub fn write_conllu<W: Write>(graphs: &[ParseGraph], mut sink: W) -> Result<()> {
    for g in graphs {
        writeln!(sink, "# doc_id = {}", g.doc_id())?;
        for t in g.tokens() {
            writeln!(
                sink,
                "{}\t{}\t{}\t{}\t{}\t_\t{}\t{}\t_\t_",
                t.index, t.form, t.lemma, t.upos, t.pos, t.head, t.deprel
            )?;
        }
        writeln!(sink)?;
    }
    sink.flush()?;
    Ok(())
}

const DETERMINERS: &[&str] = &[
    "the", "a", "an", "this", "that", "these", "those", "all", "some", "every", "each", "any",
    "no", "another", "both", "either", "neither",
];
const POSSESSIVES: &[&str] = &["my", "our", "your", "their", "his", "her", "its", "thy"];
const MODALS: &[&str] = &[
    "will", "would", "can", "could", "should", "must", "may", "might", "shall",
];
const PREPOSITIONS: &[&str] = &[
    "of", "in", "on", "at", "for", "with", "from", "by", "about", "into", "over", "after",
    "before", "under", "against", "between", "through", "out", "off", "up", "down",
];
const CONJUNCTIONS: &[&str] = &["and", "or", "but", "if", "because", "than", "as", "while"];
const ADVERBS: &[&str] = &[
    "not", "never", "very", "too", "here", "there", "now", "just", "again", "always", "soon",
    "already", "still", "back", "away",
];
/// Frequent verbs, including the action verbs the synthetic generator plants.
pub(crate) const VERBS: &[&str] = &[
    "is", "are", "was", "were", "be", "been", "am", "have", "has", "had", "do", "does", "did",
    "want", "send", "sent", "hate", "go", "get", "make", "take", "kill", "stop", "ban", "deport",
    "expel", "remove", "kick", "hang", "fight", "attack", "destroy", "love", "like", "need",
    "keep", "let", "come", "see", "know", "think", "say", "said", "tell", "told", "give", "put",
    "leave", "stay", "live", "work", "run", "invade", "protect", "push", "throw", "burn", "blame",
    "fear", "steal", "bring", "drive", "chase", "shut", "lock", "beat", "crush", "purge", "eject",
    "exile", "banish", "deny", "reject",
];

fn heuristic_tag(token: &str, pronouns: &crate::corpus::PronounConfig) -> &'static str {
    let t = token;
    if !t.chars().any(char::is_alphanumeric) {
        return if t.starts_with('<') && t.ends_with('>') {
            "SYM"
        } else {
            "."
        };
    }
    if t.starts_with('<') && t.ends_with('>') {
        return "SYM";
    }
    if POSSESSIVES.contains(&t) {
        return "PRP$";
    }
    if pronouns.is_pronoun(t) {
        return "PRP";
    }
    if DETERMINERS.contains(&t) {
        return "DT";
    }
    if MODALS.contains(&t) {
        return "MD";
    }
    if t == "to" {
        return "TO";
    }
    if PREPOSITIONS.contains(&t) {
        return "IN";
    }
    if CONJUNCTIONS.contains(&t) {
        return "CC";
    }
    if ADVERBS.contains(&t) {
        return "RB";
    }
    if VERBS.contains(&t) {
        return "VB";
    }
    if t.chars().all(|c| c.is_ascii_digit()) {
        return "CD";
    }
    let len = t.chars().count();
    if len > 3 && t.ends_with("ly") {
        "RB"
    } else if len > 4 && t.ends_with("ing") {
        "VBG"
    } else if len > 3 && t.ends_with("ed") {
        "VBD"
    } else {
        "NN"
    }
}

fn nearest(positions: &[usize], i: usize) -> Option<usize> {
    // ties go to the preceding position
    positions
        .iter()
        .copied()
        .min_by_key(|&p| (p.abs_diff(i), p > i))
}

/// Rule-based tagging and attachment for token lists.
///
/// Tags come from closed-class word lists plus suffix rules (`-ly` adverbs,
/// `-ing`/`-ed` verbs, nouns otherwise). Attachments: a pronoun or noun is
/// the `nsubj` of the nearest verb when that verb follows it and the `dobj`
/// when it precedes it; a determiner is the `det` of the next noun; an
/// adverb is the `advmod` of the nearest verb; a possessive directly before
/// a noun is its `nmod:poss`. Everything else hangs off the root (the first
/// verb, else the first noun, else the first token) as `dep`.
pub fn heuristic_parse<S: AsRef<str>>(doc_id: &str, tokens: &[S]) -> Result<ParseGraph> {
    if tokens.is_empty() {
        return Err(Error::Data(format!(
            "heuristic parse of `{doc_id}`: empty token list"
        )));
    }
    let pronouns = crate::corpus::PronounConfig::default();
    let forms: Vec<&str> = tokens.iter().map(AsRef::as_ref).collect();
    let tags: Vec<&str> = forms.iter().map(|t| heuristic_tag(t, &pronouns)).collect();
    let is_noun = |j: usize| tags[j].starts_with("NN");
    let verbs: Vec<usize> = (0..tags.len())
        .filter(|&j| tags[j].starts_with("VB"))
        .collect();
    let root = verbs
        .first()
        .copied()
        .or_else(|| (0..tags.len()).find(|&j| is_noun(j)))
        .unwrap_or(0);

    let mut parsed = Vec::with_capacity(forms.len());
    for (i, (&form, &tag)) in forms.iter().zip(&tags).enumerate() {
        let (head, deprel) = if i == root {
            (None, "root")
        } else if tag.starts_with("VB") {
            (Some(root), "conj")
        } else if tag == "MD" {
            (verbs.iter().copied().find(|&v| v > i).or(Some(root)), "aux")
        } else if tag == "PRP$" && i + 1 < forms.len() && is_noun(i + 1) {
            (Some(i + 1), "nmod:poss")
        } else if tag.starts_with("PRP") || tag.starts_with("NN") {
            match nearest(&verbs, i) {
                Some(v) if v > i => (Some(v), "nsubj"),
                Some(v) => (Some(v), "dobj"),
                None => (Some(root), "dep"),
            }
        } else if tag == "DT" {
            let noun = (i + 1..forms.len())
                .take_while(|&j| tags[j] == "DT" || tags[j].starts_with("JJ") || is_noun(j))
                .find(|&j| is_noun(j));
            match noun {
                Some(n) => (Some(n), "det"),
                None => (Some(root), "dep"),
            }
        } else if tag.starts_with("RB") {
            match nearest(&verbs, i) {
                Some(v) => (Some(v), "advmod"),
                None => (Some(root), "dep"),
            }
        } else if tag == "." {
            (Some(root), "punct")
        } else {
            (Some(root), "dep")
        };
        parsed.push(ParseToken {
            index: i + 1,
            form: form.to_string(),
            lemma: form.to_lowercase(),
            upos: penn_to_upos(tag).to_string(),
            pos: tag.to_string(),
            head: head.map_or(0, |h| h + 1),
            deprel: deprel.to_string(),
        });
    }
    ParseGraph::new(doc_id, parsed, ParseSource::Heuristic)
}
