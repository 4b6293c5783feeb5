//! Corpus ingestion, tweet tokenization and two-sided pronoun statistics.
//!
//! A corpus is a list of short labeled texts. JSONL records carry `id`,
//! `text` and an optional integer `label` (0 = non-hateful, 1 = hateful);
//! the CSV variant uses the header `id,text,label`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Replaces URLs in the token stream.
pub const URL_TOKEN: &str = "<url>";
/// Replaces `@user` mentions in the token stream.
pub const MENTION_TOKEN: &str = "<mention>";

const DEFAULT_PRONOUNS: &str = include_str!("../data/pronouns.txt");

/// Binary class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    NonHateful,
    Hateful,
}

impl Label {
    pub fn as_u8(self) -> u8 {
        match self {
            Label::NonHateful => 0,
            Label::Hateful => 1,
        }
    }

    pub fn from_u8(value: u8) -> Option<Label> {
        match value {
            0 => Some(Label::NonHateful),
            1 => Some(Label::Hateful),
            _ => None,
        }
    }

    pub fn is_hateful(self) -> bool {
        self == Label::Hateful
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// Tokenizer switches. The defaults are what every pipeline uses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub replace_urls: bool,
    pub replace_mentions: bool,
    pub strip_hashtags: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            lowercase: true,
            replace_urls: true,
            replace_mentions: true,
            strip_hashtags: true,
        }
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_url(chunk: &str) -> bool {
    let lower = chunk.to_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
}

/// Split a tweet into normalized tokens.
///
/// URLs become [`URL_TOKEN`], mentions become [`MENTION_TOKEN`], the `#`
/// of a hashtag is dropped and every punctuation character becomes its own
/// token. Apostrophes between word characters stay inside the word.
pub fn tokenize(text: &str, config: &TokenizerConfig) -> Vec<String> {
    let mut tokens = Vec::new();
    for raw in text.split_whitespace() {
        if raw == URL_TOKEN || raw == MENTION_TOKEN {
            tokens.push(raw.to_string());
            continue;
        }
        if config.replace_urls && is_url(raw) {
            tokens.push(URL_TOKEN.to_string());
            continue;
        }
        let chunk = if config.lowercase {
            raw.to_lowercase()
        } else {
            raw.to_string()
        };
        let chars: Vec<char> = chunk.chars().collect();
        let mut start = 0;
        if config.replace_mentions && chars.len() > 1 && chars[0] == '@' && is_word_char(chars[1]) {
            tokens.push(MENTION_TOKEN.to_string());
            start = 1;
            while start < chars.len() && is_word_char(chars[start]) {
                start += 1;
            }
        }
        split_chunk(&chars[start..], config, &mut tokens);
    }
    tokens
}

fn split_chunk(chars: &[char], config: &TokenizerConfig, tokens: &mut Vec<String>) {
    let mut word = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let next_is_word = chars.get(i + 1).is_some_and(|&n| is_word_char(n));
        if is_word_char(c) || (c == '\'' && !word.is_empty() && next_is_word) {
            word.push(c);
        } else if c == '#' && config.strip_hashtags && word.is_empty() && next_is_word {
            // hashtag marker
        } else {
            if !word.is_empty() {
                tokens.push(std::mem::take(&mut word));
            }
            tokens.push(c.to_string());
        }
    }
    if !word.is_empty() {
        tokens.push(word);
    }
}

/// One short text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub tokens: Vec<String>,
    pub label: Option<Label>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: Option<Label>) -> Self {
        Self::with_config(id, text, label, &TokenizerConfig::default())
    }

    pub fn with_config(
        id: impl Into<String>,
        text: impl Into<String>,
        label: Option<Label>,
        config: &TokenizerConfig,
    ) -> Self {
        let text = text.into();
        let tokens = tokenize(&text, config);
        Document {
            id: id.into(),
            text,
            tokens,
            label,
        }
    }
}

/// A named, immutable collection of documents with unique ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    name: String,
    documents: Vec<Document>,
    class_counts: BTreeMap<Label, usize>,
    by_id: HashMap<String, usize>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, documents: Vec<Document>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(documents.len());
        let mut class_counts = BTreeMap::new();
        for (i, doc) in documents.iter().enumerate() {
            if by_id.insert(doc.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(doc.id.clone()));
            }
            if let Some(label) = doc.label {
                *class_counts.entry(label).or_insert(0) += 1;
            }
        }
        Ok(Dataset {
            name: name.into(),
            documents,
            class_counts,
            by_id,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Number of documents per label. Unlabeled documents are not counted.
    pub fn class_counts(&self) -> &BTreeMap<Label, usize> {
        &self.class_counts
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.by_id.get(id).map(|&i| &self.documents[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    /// Labels of every document, failing on the first unlabeled one.
    pub fn labels(&self) -> Result<Vec<Label>> {
        self.documents
            .iter()
            .map(|d| d.label.ok_or_else(|| Error::Unlabeled(d.id.clone())))
            .collect()
    }
}

/// On-disk corpus encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl CorpusFormat {
    /// Guess from a file extension, defaulting to JSONL.
    pub fn from_path(path: &std::path::Path) -> CorpusFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "csv" => Ok(CorpusFormat::Csv),
            other => Err(Error::Config(format!("unknown corpus format `{other}`"))),
        }
    }
}

#[derive(Deserialize)]
struct JsonRecord {
    id: String,
    text: String,
    #[serde(default)]
    label: Option<serde_json::Value>,
}

#[derive(Serialize)]
struct JsonRecordOut<'a> {
    id: &'a str,
    text: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<u8>,
}

fn json_label(value: Option<serde_json::Value>, line: usize) -> Result<Option<Label>> {
    match value {
        None | Some(serde_json::Value::Null) => Ok(None),
        Some(v) => v
            .as_u64()
            .and_then(|n| u8::try_from(n).ok())
            .and_then(Label::from_u8)
            .map(Some)
            .ok_or_else(|| Error::format("corpus", line, format!("unknown label value {v}"))),
    }
}

fn csv_label(field: Option<&str>, line: usize) -> Result<Option<Label>> {
    match field.map(str::trim) {
        None | Some("") => Ok(None),
        Some("0") => Ok(Some(Label::NonHateful)),
        Some("1") => Ok(Some(Label::Hateful)),
        Some(other) => Err(Error::format(
            "corpus",
            line,
            format!("unknown label value `{other}`"),
        )),
    }
}

/// Read a corpus, tokenizing each record.
pub fn load_corpus<R: Read>(
    source: R,
    format: CorpusFormat,
    name: &str,
    tokenizer: &TokenizerConfig,
) -> Result<Dataset> {
    let documents = match format {
        CorpusFormat::Jsonl => read_jsonl(source, tokenizer)?,
        CorpusFormat::Csv => read_csv(source, tokenizer)?,
    };
    Dataset::new(name, documents)
}

fn read_jsonl<R: Read>(source: R, tokenizer: &TokenizerConfig) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in BufReader::new(source).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: JsonRecord = serde_json::from_str(&line)
            .map_err(|e| Error::format("corpus", line_no, e.to_string()))?;
        let label = json_label(record.label, line_no)?;
        if !seen.insert(record.id.clone()) {
            return Err(Error::format(
                "corpus",
                line_no,
                format!("duplicate document id `{}`", record.id),
            ));
        }
        docs.push(Document::with_config(
            record.id,
            record.text,
            label,
            tokenizer,
        ));
    }
    Ok(docs)
}

fn read_csv<R: Read>(source: R, tokenizer: &TokenizerConfig) -> Result<Vec<Document>> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(false)
        .from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| Error::format("corpus", 1, e.to_string()))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (id_col, text_col) = match (column("id"), column("text")) {
        (Some(i), Some(t)) => (i, t),
        _ => {
            return Err(Error::format(
                "corpus",
                1,
                "header must contain `id` and `text`",
            ))
        }
    };
    let label_col = column("label");

    let mut docs = Vec::new();
    let mut seen = BTreeSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::format("corpus", line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |col: usize, name: &str| {
            record
                .get(col)
                .ok_or_else(|| Error::format("corpus", line, format!("missing field `{name}`")))
        };
        let id = field(id_col, "id")?.to_string();
        let text = field(text_col, "text")?.to_string();
        let label = csv_label(label_col.and_then(|c| record.get(c)), line)?;
        if !seen.insert(id.clone()) {
            return Err(Error::format(
                "corpus",
                line,
                format!("duplicate document id `{id}`"),
            ));
        }
        docs.push(Document::with_config(id, text, label, tokenizer));
    }
    Ok(docs)
}

/// Write a dataset in the same record format [`load_corpus`] reads.
pub fn write_corpus<W: Write>(dataset: &Dataset, sink: W, format: CorpusFormat) -> Result<()> {
    match format {
        CorpusFormat::Jsonl => {
            let mut sink = sink;
            for doc in dataset.documents() {
                let record = JsonRecordOut {
                    id: &doc.id,
                    text: &doc.text,
                    label: doc.label.map(Label::as_u8),
                };
                let line = serde_json::to_string(&record)
                    .map_err(|e| Error::Data(format!("serializing record: {e}")))?;
                writeln!(sink, "{line}")?;
            }
            sink.flush()?;
        }
        CorpusFormat::Csv => {
            let mut writer = csv::Writer::from_writer(sink);
            let csv_err = |e: csv::Error| Error::Data(format!("writing csv: {e}"));
            writer
                .write_record(["id", "text", "label"])
                .map_err(csv_err)?;
            for doc in dataset.documents() {
                let label = doc.label.map(|l| l.to_string()).unwrap_or_default();
                writer
                    .write_record([doc.id.as_str(), doc.text.as_str(), label.as_str()])
                    .map_err(csv_err)?;
            }
            writer.flush()?;
        }
    }
    Ok(())
}

/// Ingroup and outgroup pronoun inventories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PronounConfig {
    ingroup: BTreeSet<String>,
    outgroup: BTreeSet<String>,
    all: BTreeSet<String>,
}

impl PronounConfig {
    /// Build from the two sides plus any further pronouns. `all` is the
    /// union of the three lists.
    pub fn new<I, S>(ingroup: I, outgroup: I, other: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let norm = |xs: I| -> BTreeSet<String> {
            xs.into_iter()
                .map(|s| s.as_ref().trim().to_lowercase())
                .filter(|s| !s.is_empty())
                .collect()
        };
        let ingroup = norm(ingroup);
        let outgroup = norm(outgroup);
        let other = norm(other);
        if ingroup.is_empty() || outgroup.is_empty() {
            return Err(Error::Config(
                "pronoun config needs non-empty [ingroup] and [outgroup]".into(),
            ));
        }
        if let Some(shared) = ingroup.intersection(&outgroup).next() {
            return Err(Error::Config(format!(
                "pronoun `{shared}` is both ingroup and outgroup"
            )));
        }
        let all = ingroup
            .iter()
            .chain(&outgroup)
            .chain(&other)
            .cloned()
            .collect();
        Ok(PronounConfig {
            ingroup,
            outgroup,
            all,
        })
    }

    /// Parse the sectioned text format (`[ingroup]`, `[outgroup]`, `[other]`).
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: [Vec<&str>; 3] = Default::default();
        let mut current: Option<usize> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with('[') {
                current = Some(match line {
                    "[ingroup]" => 0,
                    "[outgroup]" => 1,
                    "[other]" => 2,
                    _ => {
                        return Err(Error::format(
                            "pronouns",
                            i + 1,
                            format!("unknown section {line}"),
                        ))
                    }
                });
                continue;
            }
            match current {
                Some(s) => sections[s].push(line),
                None => {
                    return Err(Error::format(
                        "pronouns",
                        i + 1,
                        "entry outside of a section",
                    ))
                }
            }
        }
        let [ingroup, outgroup, other] = sections;
        PronounConfig::new(ingroup, outgroup, other)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let others: Vec<&String> = self
            .all
            .iter()
            .filter(|p| !self.ingroup.contains(*p) && !self.outgroup.contains(*p))
            .collect();
        for (name, items) in [
            ("ingroup", self.ingroup.iter().collect::<Vec<_>>()),
            ("outgroup", self.outgroup.iter().collect()),
            ("other", others),
        ] {
            out.push_str(&format!("[{name}]\n"));
            for p in items {
                out.push_str(p);
                out.push('\n');
            }
        }
        out
    }

    pub fn ingroup(&self) -> &BTreeSet<String> {
        &self.ingroup
    }

    pub fn outgroup(&self) -> &BTreeSet<String> {
        &self.outgroup
    }

    pub fn all_pronouns(&self) -> &BTreeSet<String> {
        &self.all
    }

    pub fn is_pronoun(&self, token: &str) -> bool {
        self.all.contains(token)
    }

    pub fn is_ingroup(&self, token: &str) -> bool {
        self.ingroup.contains(token)
    }

    pub fn is_outgroup(&self, token: &str) -> bool {
        self.outgroup.contains(token)
    }
}

impl Default for PronounConfig {
    fn default() -> Self {
        PronounConfig::parse(DEFAULT_PRONOUNS).expect("bundled pronoun list is valid")
    }
}

/// How a document qualifies as "two-sided".
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum TwoSidedMode {
    /// At least one ingroup and one outgroup pronoun.
    #[default]
    IngroupOutgroup,
    /// At least two pronoun occurrences of any kind.
    AnyTwoPronouns,
}

impl FromStr for TwoSidedMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ingroup-outgroup" | "ingroup_outgroup" => Ok(TwoSidedMode::IngroupOutgroup),
            "any-two-pronouns" | "any_two_pronouns" => Ok(TwoSidedMode::AnyTwoPronouns),
            other => Err(Error::Config(format!("unknown two-sided mode `{other}`"))),
        }
    }
}

impl fmt::Display for TwoSidedMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TwoSidedMode::IngroupOutgroup => "ingroup-outgroup",
            TwoSidedMode::AnyTwoPronouns => "any-two-pronouns",
        })
    }
}

pub fn tokens_two_sided<S: AsRef<str>>(
    tokens: &[S],
    config: &PronounConfig,
    mode: TwoSidedMode,
) -> bool {
    match mode {
        TwoSidedMode::IngroupOutgroup => {
            let mut inside = false;
            let mut outside = false;
            for t in tokens {
                let t = t.as_ref();
                inside |= config.is_ingroup(t);
                outside |= config.is_outgroup(t);
                if inside && outside {
                    return true;
                }
            }
            false
        }
        TwoSidedMode::AnyTwoPronouns => {
            tokens
                .iter()
                .filter(|t| config.is_pronoun(t.as_ref()))
                .take(2)
                .count()
                == 2
        }
    }
}

pub fn is_two_sided(doc: &Document, config: &PronounConfig, mode: TwoSidedMode) -> bool {
    tokens_two_sided(&doc.tokens, config, mode)
}

/// Fraction of documents per label that are two-sided.
///
/// Labels with no documents are absent from the map.
pub fn two_sided_rate(
    dataset: &Dataset,
    config: &PronounConfig,
    mode: TwoSidedMode,
) -> Result<BTreeMap<Label, f64>> {
    let mut counts: BTreeMap<Label, (usize, usize)> = BTreeMap::new();
    for doc in dataset.documents() {
        let label = doc.label.ok_or_else(|| Error::Unlabeled(doc.id.clone()))?;
        let entry = counts.entry(label).or_insert((0, 0));
        entry.0 += 1;
        if is_two_sided(doc, config, mode) {
            entry.1 += 1;
        }
    }
    Ok(counts
        .into_iter()
        .map(|(label, (total, hits))| (label, hits as f64 / total as f64))
        .collect())
}
