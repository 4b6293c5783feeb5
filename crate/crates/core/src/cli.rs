//! Command-line front end.
//!
//! Every subcommand reads an optional `--config` file of `key = value`
//! lines whose keys are long flag names; flags given on the command line
//! take precedence. Failures print one line, `error: <kind>: <message>`,
//! and exit with 1 (usage), 2 (data) or 3 (numerical).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Debug;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::parser::ValueSource;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::classify::{load_terms, Activation, ClassifierConfig};
use crate::corpus::{
    is_two_sided, load_corpus, two_sided_rate, write_corpus, CorpusFormat, Dataset, Label,
    PronounConfig, TokenizerConfig, TwoSidedMode,
};
use crate::embedding::io::{load_model, save_model};
use crate::embedding::{train, EmbedHyper, EmbedMode};
use crate::error::{Error, Result};
use crate::eval::{
    cross_validate, generate_synthetic, render_report, report_json, CorpusSource, EvalMode,
    LexiconSource, Pipeline, PipelineConfig, ReportFormat, SyntheticSpec,
};
use crate::lexicon::{
    augment, build_lexicon_from_dataset, load_lexicon, save_lexicon, AugmentOptions, LexiconConfig,
    OtheringLexicon,
};
use crate::parse::{index_parses, read_conllu, write_conllu, FeatureForm, ParseMap};
use crate::project::{export_projector, neighbors, pca2d, DistanceBands};

/// Embedding sizes and windows covered by `embed --sweep`.
pub const SWEEP_DIMS: [usize; 5] = [100, 300, 600, 800, 1000];
pub const SWEEP_WINDOWS: [usize; 5] = [2, 3, 5, 6, 10];

#[derive(Parser, Debug)]
#[command(
    name = "othering",
    version,
    about = "Othering-language features, paragraph vectors and cross-validated hate-speech classifiers",
    propagate_version = true
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct GlobalArgs {
    /// File of `key = value` lines using long flag names.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Root seed; every random component derives its own seed from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads. 1 gives bit-reproducible results.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Subcommand, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Validate a corpus and print a summary.
    Ingest(IngestArgs),
    /// Two-sided pronoun rates per class.
    Stats(StatsArgs),
    /// Build an othering lexicon from hateful documents and their parses.
    Lexicon(LexiconArgs),
    /// Train paragraph vectors over (optionally augmented) token streams.
    Embed(EmbedArgs),
    /// Cross-validate a pipeline and write its report.
    Evaluate(EvaluateArgs),
    /// Export projector files and the neighbourhood of an anchor token.
    Project(ProjectArgs),
    /// Generate a planted synthetic corpus with parses and ground truth.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CorpusFormatArg {
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TwoSidedArg {
    IngroupOutgroup,
    AnyTwoPronouns,
}

impl From<TwoSidedArg> for TwoSidedMode {
    fn from(a: TwoSidedArg) -> Self {
        match a {
            TwoSidedArg::IngroupOutgroup => TwoSidedMode::IngroupOutgroup,
            TwoSidedArg::AnyTwoPronouns => TwoSidedMode::AnyTwoPronouns,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormArg {
    Surface,
    Lemma,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Pvdm,
    Pvdbow,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ActivationArg {
    Tanh,
    Logistic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TableFormat {
    Markdown,
    Json,
}

#[derive(Args, Debug)]
pub struct CorpusArgs {
    /// Corpus file, JSONL or CSV.
    #[arg(long, value_name = "FILE")]
    pub corpus: Option<PathBuf>,
    /// Corpus encoding; guessed from the extension when absent.
    #[arg(long, value_enum)]
    pub corpus_format: Option<CorpusFormatArg>,
}

#[derive(Args, Debug)]
pub struct PronounArgs {
    /// Pronoun inventory with [ingroup], [outgroup] and [other] sections.
    #[arg(long, value_name = "FILE")]
    pub pronouns: Option<PathBuf>,
    /// What makes a document two-sided.
    #[arg(long, value_enum, default_value = "ingroup-outgroup")]
    pub two_sided: TwoSidedArg,
}

#[derive(Args, Debug)]
pub struct HyperArgs {
    #[arg(long, default_value_t = 600)]
    pub dim: usize,
    /// Context words on each side of the target.
    #[arg(long, default_value_t = 2)]
    pub window: usize,
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    /// Initial learning rate, decayed linearly to --lr-end.
    #[arg(long, default_value_t = 0.025)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.0001)]
    pub lr_end: f64,
    /// Negative samples per target.
    #[arg(long, default_value_t = 5)]
    pub negative: usize,
    /// Tokens seen fewer times are dropped from the vocabulary.
    #[arg(long, default_value_t = 2)]
    pub min_count: usize,
}

impl HyperArgs {
    fn hyper(&self, mode: EmbedMode, seed: u64, threads: usize) -> EmbedHyper {
        EmbedHyper {
            dim: self.dim,
            window: self.window,
            epochs: self.epochs,
            lr_start: self.lr,
            lr_end: self.lr_end,
            negative: self.negative,
            min_count: self.min_count,
            mode,
            seed,
            threads,
        }
    }
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Write the summary here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub pronouns: PronounArgs,
    #[arg(long, value_enum, default_value = "markdown")]
    pub format: TableFormat,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LexiconArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// CoNLL-U parses bound to the corpus by `# doc_id` comments.
    #[arg(long, value_name = "FILE")]
    pub parses: Option<PathBuf>,
    #[command(flatten)]
    pub pronouns: PronounArgs,
    /// Token string used for lexicon entries.
    #[arg(long, value_enum, default_value = "surface")]
    pub form: FormArg,
    /// Entries found in fewer kept documents are dropped.
    #[arg(long, default_value_t = 1)]
    pub min_count: usize,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long, value_name = "FILE")]
    pub parses: Option<PathBuf>,
    /// Augment streams with dependency pairs and hits of this lexicon.
    #[arg(long, value_name = "FILE")]
    pub lexicon: Option<PathBuf>,
    /// Only hateful documents contribute dependency-pair tokens.
    #[arg(long)]
    pub features_hateful_only: bool,
    #[arg(long, value_enum, default_value = "pvdm")]
    pub mode: ModeArg,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Train every dim/window pair of the sweep grid; --out is then a directory.
    #[arg(long)]
    pub sweep: bool,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long, value_name = "FILE")]
    pub parses: Option<PathBuf>,
    #[command(flatten)]
    pub pronouns: PronounArgs,
    /// `[lexicon+]{pvdm|pvdbow|bow}+{mlp|logreg|gnb}`
    #[arg(long, default_value = "lexicon+pvdm+mlp")]
    pub pipeline: String,
    /// Prebuilt lexicon file.
    #[arg(long, value_name = "FILE")]
    pub lexicon: Option<PathBuf>,
    /// Build the lexicon from a separate corpus (needs --lexicon-parses).
    #[arg(long, value_name = "FILE")]
    pub lexicon_corpus: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub lexicon_parses: Option<PathBuf>,
    /// Build the lexicon from the evaluation corpus itself.
    #[arg(long)]
    pub lexicon_from_eval_corpus: bool,
    /// Learn lexicon and embeddings from training folds only.
    #[arg(long)]
    pub inductive: bool,
    #[arg(long)]
    pub features_hateful_only: bool,
    /// Feed raw vectors to the classifier.
    #[arg(long)]
    pub no_standardize: bool,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Inference passes for held-out documents; 0 uses --epochs.
    #[arg(long, default_value_t = 0)]
    pub infer_steps: usize,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[arg(long, default_value_t = 2)]
    pub hidden_layers: usize,
    #[arg(long, default_value_t = 5)]
    pub hidden_units: usize,
    #[arg(long, default_value_t = 200)]
    pub mlp_epochs: usize,
    #[arg(long, value_enum, default_value = "tanh")]
    pub activation: ActivationArg,
    #[arg(long, default_value_t = 0.05)]
    pub mlp_lr: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,
    #[arg(long, default_value_t = 500)]
    pub logreg_epochs: usize,
    #[arg(long, default_value_t = 0.5)]
    pub logreg_lr: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub var_floor: f64,
    #[arg(long, default_value_t = 1)]
    pub ngram_min: usize,
    #[arg(long, default_value_t = 5)]
    pub ngram_max: usize,
    #[arg(long, default_value_t = 2000)]
    pub max_features: usize,
    /// One hateful term per line, for binary BoW indicators.
    #[arg(long, value_name = "FILE")]
    pub hateful_terms: Option<PathBuf>,
    /// Full JSON report; stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Also write the summary table as markdown.
    #[arg(long, value_name = "FILE")]
    pub markdown: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ProjectArgs {
    /// Model file written by `embed`.
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    #[arg(long, default_value = "us")]
    pub anchor: String,
    /// Rows of the neighbour table.
    #[arg(long, default_value_t = 20)]
    pub neighbors: usize,
    #[arg(long, value_name = "FILE")]
    pub pronouns: Option<PathBuf>,
    /// Also write 2-D PCA coordinates of every word vector.
    #[arg(long)]
    pub pca: bool,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// `key = value` generator settings; the root --seed replaces its seed.
    #[arg(long, value_name = "FILE")]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub n_docs: Option<usize>,
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long)]
    pub p0: Option<f64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

/// Parse arguments, run, and return the process exit code.
pub fn main() -> i32 {
    run(std::env::args_os())
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match resolve(&argv) {
        Ok(cli) => cli,
        Err(Resolve::Clap(e)) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                eprint!("{e}");
                return 1;
            }
            let text = e.to_string();
            let first = text
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            eprintln!("error: usage: {first}");
            return 1;
        }
        Err(Resolve::Other(e)) => return fail(&e),
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => fail(&e),
    }
}

fn fail(e: &Error) -> i32 {
    let message = e.to_string().replace('\n', " ");
    eprintln!("error: {}: {message}", e.kind());
    e.exit_code()
}

enum Resolve {
    Clap(clap::Error),
    Other(Error),
}

/// Parse once to learn the subcommand and which flags were typed, then
/// append config-file values for the rest and parse again.
fn resolve(argv: &[OsString]) -> std::result::Result<Cli, Resolve> {
    let mut cmd = Cli::command();
    cmd.build();
    let matches = cmd
        .clone()
        .try_get_matches_from(argv)
        .map_err(Resolve::Clap)?;
    let Some(path) = matches.get_one::<PathBuf>("config") else {
        return Cli::try_parse_from(argv).map_err(Resolve::Clap);
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let entries = read_config(path).map_err(Resolve::Other)?;
    let sub_cmd = cmd
        .find_subcommand(name)
        .expect("matched subcommand exists");
    let mut known = std::collections::BTreeSet::new();
    for s in cmd.get_subcommands() {
        for a in s.get_arguments() {
            if let Some(l) = a.get_long() {
                known.insert(l.to_string());
            }
        }
    }
    let mut extended = argv.to_vec();
    for (line, key, value) in entries {
        if key == "config" || !known.contains(&key) {
            return Err(Resolve::Other(Error::Config(format!(
                "config line {line}: unknown key `{key}`"
            ))));
        }
        let Some(arg) = sub_cmd
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
        else {
            continue;
        };
        let id = arg.get_id().as_str();
        if sub.value_source(id) == Some(ValueSource::CommandLine) {
            continue;
        }
        let takes_value = arg.get_action().takes_values();
        if takes_value {
            extended.push(format!("--{key}").into());
            extended.push(value.into());
        } else {
            match value.as_str() {
                "true" => extended.push(format!("--{key}").into()),
                "false" => {}
                _ => {
                    return Err(Resolve::Other(Error::Config(format!(
                        "config line {line}: `{key}` must be true or false"
                    ))))
                }
            }
        }
    }
    Cli::try_parse_from(extended).map_err(Resolve::Clap)
}

fn read_config(path: &Path) -> Result<Vec<(usize, String, String)>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("config line {}: expected key = value", i + 1)))?;
        out.push((i + 1, k.trim().replace('_', "-"), v.trim().to_string()));
    }
    Ok(out)
}

fn dispatch(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    if g.threads == 0 {
        return Err(Error::Config("--threads must be at least 1".into()));
    }
    match &cli.command {
        Command::Ingest(a) => ingest(a, g),
        Command::Stats(a) => stats(a, g),
        Command::Lexicon(a) => lexicon(a, g),
        Command::Embed(a) => embed(a, g),
        Command::Evaluate(a) => evaluate(a, g),
        Command::Project(a) => project(a, g),
        Command::Synth(a) => synth(a, g),
    }
}

/// First 8 bytes of SHA-256 over the resolved arguments and seed.
fn run_hash<A: Debug>(args: &A, seed: u64) -> String {
    let mut h = Sha256::new();
    h.update(format!("{args:?};seed={seed}"));
    hex::encode(&h.finalize()[..8])
}

fn required<'a, T>(value: &'a Option<T>, flag: &str, why: &str) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| Error::Config(format!("missing --{flag} ({why})")))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Data(format!("cannot write {}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path)
        .map_err(|e| Error::Data(format!("cannot create {}: {e}", path.display())))
}

/// Write `text` to `path`, or to stdout when no path is given.
fn emit(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn load_dataset(args: &CorpusArgs) -> Result<Dataset> {
    let path = required(&args.corpus, "corpus", "the corpus to read")?;
    let format = match args.corpus_format {
        Some(CorpusFormatArg::Jsonl) => CorpusFormat::Jsonl,
        Some(CorpusFormatArg::Csv) => CorpusFormat::Csv,
        None => CorpusFormat::from_path(path),
    };
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".into());
    load_corpus(open(path)?, format, &name, &TokenizerConfig::default())
}

fn load_parses(path: &Path) -> Result<ParseMap> {
    Ok(index_parses(read_conllu(open(path)?)?))
}

fn load_pronouns(path: Option<&PathBuf>) -> Result<PronounConfig> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Error::Data(format!("cannot read {}: {e}", p.display())))?;
            PronounConfig::parse(&text)
        }
        None => Ok(PronounConfig::default()),
    }
}

fn label_name(label: Label) -> &'static str {
    if label.is_hateful() {
        "hateful"
    } else {
        "non_hateful"
    }
}

fn to_json_line(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json value serializes");
    s.push('\n');
    s
}

fn ingest(a: &IngestArgs, g: &GlobalArgs) -> Result<()> {
    let ds = load_dataset(&a.corpus)?;
    let counts = ds.class_counts();
    let labeled: usize = counts.values().sum();
    let tokens: usize = ds.documents().iter().map(|d| d.tokens.len()).sum();
    let vocabulary: std::collections::BTreeSet<&String> =
        ds.documents().iter().flat_map(|d| &d.tokens).collect();
    let summary = json!({
        "schema_version": 1,
        "config_hash": run_hash(a, g.seed),
        "seed": g.seed,
        "name": ds.name(),
        "documents": ds.len(),
        "hateful": counts.get(&Label::Hateful).copied().unwrap_or(0),
        "non_hateful": counts.get(&Label::NonHateful).copied().unwrap_or(0),
        "unlabeled": ds.len() - labeled,
        "tokens": tokens,
        "mean_tokens": if ds.is_empty() { 0.0 } else { tokens as f64 / ds.len() as f64 },
        "vocabulary": vocabulary.len(),
    });
    emit(a.out.as_ref(), &to_json_line(&summary))
}

fn stats(a: &StatsArgs, g: &GlobalArgs) -> Result<()> {
    let ds = load_dataset(&a.corpus)?;
    let pronouns = load_pronouns(a.pronouns.pronouns.as_ref())?;
    let mode: TwoSidedMode = a.pronouns.two_sided.into();
    let rates = two_sided_rate(&ds, &pronouns, mode)?;
    let mut rows = Vec::new();
    for (&label, &rate) in rates.iter().rev() {
        let docs: Vec<_> = ds
            .documents()
            .iter()
            .filter(|d| d.label == Some(label))
            .collect();
        let hits = docs
            .iter()
            .filter(|d| is_two_sided(d, &pronouns, mode))
            .count();
        rows.push((label, docs.len(), hits, rate));
    }
    let hash = run_hash(a, g.seed);
    let text = match a.format {
        TableFormat::Json => to_json_line(&json!({
            "schema_version": 1,
            "config_hash": hash,
            "seed": g.seed,
            "mode": mode.to_string(),
            "rates": rows.iter().map(|&(label, documents, two_sided, rate)| json!({
                "label": label_name(label),
                "documents": documents,
                "two_sided": two_sided,
                "rate": rate,
            })).collect::<Vec<_>>(),
        })),
        TableFormat::Markdown => {
            let mut s = format!(
                "Two-sided rate ({mode}), config_hash {hash}, seed {}\n\n| Class | Documents | Two-sided | Rate |\n|---|---|---|---|\n",
                g.seed
            );
            for (label, documents, two_sided, rate) in rows {
                s.push_str(&format!(
                    "| {} | {documents} | {two_sided} | {rate} |\n",
                    label_name(label)
                ));
            }
            s
        }
    };
    emit(a.out.as_ref(), &text)
}

fn lexicon(a: &LexiconArgs, g: &GlobalArgs) -> Result<()> {
    let out = required(&a.out, "out", "where to write the lexicon")?;
    let parses_path = required(&a.parses, "parses", "the lexicon reads dependency parses")?;
    let ds = load_dataset(&a.corpus)?;
    let parses = load_parses(parses_path)?;
    let pronouns = load_pronouns(a.pronouns.pronouns.as_ref())?;
    let config = LexiconConfig {
        mode: a.pronouns.two_sided.into(),
        form: match a.form {
            FormArg::Surface => FeatureForm::Surface,
            FormArg::Lemma => FeatureForm::Lemma,
        },
        min_count: a.min_count,
    };
    let lex = build_lexicon_from_dataset(&ds, &parses, &pronouns, &config)?.with_seed(g.seed);
    save_lexicon(&lex, create(out)?)?;
    let p = lex.provenance();
    println!(
        "lexicon {}: {} dependency entries, {} words, {} pronouns from {} of {} hateful documents (config_hash {}, seed {})",
        out.display(),
        p.dep_count,
        p.word_count,
        p.pronoun_count,
        p.kept_docs,
        p.input_docs,
        p.config_hash,
        p.seed
    );
    Ok(())
}

fn embed_streams(a: &EmbedArgs) -> Result<Vec<(String, Vec<String>)>> {
    let ds = load_dataset(&a.corpus)?;
    let Some(lex_path) = &a.lexicon else {
        if a.features_hateful_only {
            return Err(Error::Config(
                "--features-hateful-only needs --lexicon".into(),
            ));
        }
        return Ok(ds
            .documents()
            .iter()
            .map(|d| (d.id.clone(), d.tokens.clone()))
            .collect());
    };
    let parses_path = required(
        &a.parses,
        "parses",
        "--lexicon augments streams with parse features",
    )?;
    let lex = load_lexicon(open(lex_path)?)?;
    let parses = load_parses(parses_path)?;
    ds.documents()
        .iter()
        .map(|d| {
            let g = parses
                .get(&d.id)
                .ok_or_else(|| Error::MissingParse(d.id.clone()))?;
            let mut opts = AugmentOptions::default();
            if a.features_hateful_only && d.label != Some(Label::Hateful) {
                opts.emit_features = false;
            }
            Ok((d.id.clone(), augment(d, g, &lex, &opts)?.stream()))
        })
        .collect()
}

fn embed(a: &EmbedArgs, g: &GlobalArgs) -> Result<()> {
    let out = required(&a.out, "out", "where to write the model")?;
    let docs = embed_streams(a)?;
    let mode = match a.mode {
        ModeArg::Pvdm => EmbedMode::Pvdm,
        ModeArg::Pvdbow => EmbedMode::Pvdbow,
    };
    let hash = run_hash(a, g.seed);
    let hash_u64 = u64::from_str_radix(&hash, 16).expect("hex digest");
    let base = a.hyper.hyper(mode, g.seed, g.threads);
    if !a.sweep {
        let model = train(&docs, &base)?;
        let mut w = create(out)?;
        save_model(&model, hash_u64, &mut w)?;
        w.flush()?;
        println!(
            "model {}: {} documents, {} tokens, dim {}, final loss {:.6} (config_hash {hash}, seed {})",
            out.display(),
            model.doc_ids().len(),
            model.vocab().len(),
            model.dim(),
            model.epoch_losses().last().copied().unwrap_or(f64::NAN),
            g.seed
        );
        return Ok(());
    }
    create_dir(out)?;
    let mut rows = Vec::new();
    for dim in SWEEP_DIMS {
        for window in SWEEP_WINDOWS {
            let hyper = EmbedHyper {
                dim,
                window,
                ..base.clone()
            };
            let model = train(&docs, &hyper)?;
            let file = format!("pv_d{dim}_k{window}.bin");
            let mut w = create(&out.join(&file))?;
            save_model(&model, hash_u64, &mut w)?;
            w.flush()?;
            let loss = model.epoch_losses().last().copied().unwrap_or(f64::NAN);
            eprintln!("dim {dim} window {window}: final loss {loss:.6}");
            rows.push(json!({ "dim": dim, "window": window, "final_loss": loss, "model": file }));
        }
    }
    let summary = json!({
        "schema_version": 1,
        "config_hash": hash,
        "seed": g.seed,
        "mode": mode.to_string(),
        "runs": rows,
    });
    emit(Some(&out.join("sweep.json")), &to_json_line(&summary))
}

fn evaluate(a: &EvaluateArgs, g: &GlobalArgs) -> Result<()> {
    let pipeline: Pipeline = a.pipeline.parse()?;
    let mode = if a.inductive {
        EvalMode::Inductive
    } else {
        EvalMode::Transductive
    };
    let sources = [
        a.lexicon.is_some(),
        a.lexicon_corpus.is_some(),
        a.lexicon_from_eval_corpus,
    ]
    .iter()
    .filter(|&&s| s)
    .count();
    if sources > 1 {
        return Err(Error::Config(
            "choose one of --lexicon, --lexicon-corpus and --lexicon-from-eval-corpus".into(),
        ));
    }
    if !pipeline.lexicon && sources > 0 {
        return Err(Error::Config(format!(
            "pipeline {pipeline} does not use a lexicon; drop the lexicon flags"
        )));
    }
    if a.lexicon_from_eval_corpus && a.inductive {
        return Err(Error::Config(
            "--inductive cannot be combined with --lexicon-from-eval-corpus".into(),
        ));
    }
    if a.lexicon_parses.is_some() && a.lexicon_corpus.is_none() {
        return Err(Error::Config(
            "--lexicon-parses needs --lexicon-corpus".into(),
        ));
    }
    if pipeline.lexicon && sources == 0 {
        return Err(Error::Config(
            "missing --lexicon, --lexicon-corpus or --lexicon-from-eval-corpus (the pipeline uses a lexicon)"
                .into(),
        ));
    }
    if pipeline.lexicon && a.parses.is_none() {
        return Err(Error::Config(
            "missing --parses (the pipeline augments documents with parse features)".into(),
        ));
    }

    let ds = load_dataset(&a.corpus)?;
    let parses = a.parses.as_deref().map(load_parses).transpose()?;
    let pronouns = load_pronouns(a.pronouns.pronouns.as_ref())?;
    let lex_config = LexiconConfig {
        mode: a.pronouns.two_sided.into(),
        ..LexiconConfig::default()
    };
    let lexicon = if let Some(path) = &a.lexicon {
        LexiconSource::External(load_lexicon(open(path)?)?)
    } else if let Some(path) = &a.lexicon_corpus {
        let parses_path = required(
            &a.lexicon_parses,
            "lexicon-parses",
            "--lexicon-corpus needs its parses",
        )?;
        let source = load_dataset(&CorpusArgs {
            corpus: Some(path.clone()),
            corpus_format: None,
        })?;
        let lex: OtheringLexicon = build_lexicon_from_dataset(
            &source,
            &load_parses(parses_path)?,
            &pronouns,
            &lex_config,
        )?;
        LexiconSource::External(lex.with_seed(g.seed))
    } else {
        if a.lexicon_from_eval_corpus {
            eprintln!(
                "warning: the lexicon is built from the evaluation corpus, including documents later held out"
            );
        }
        LexiconSource::FromEval {
            pronouns: pronouns.clone(),
            config: lex_config,
        }
    };

    let mut cfg = PipelineConfig::new(pipeline);
    cfg.hyper = a.hyper.hyper(EmbedMode::Pvdm, g.seed, g.threads);
    cfg.classifier = match ClassifierConfig::default_for(pipeline.classifier) {
        ClassifierConfig::Mlp(mut m) => {
            m.hidden_layers = a.hidden_layers;
            m.hidden_units = a.hidden_units;
            m.epochs = a.mlp_epochs;
            m.learning_rate = a.mlp_lr;
            m.activation = match a.activation {
                ActivationArg::Tanh => Activation::Tanh,
                ActivationArg::Logistic => Activation::Logistic,
            };
            ClassifierConfig::Mlp(m)
        }
        ClassifierConfig::LogReg(mut l) => {
            l.l2 = a.l2;
            l.epochs = a.logreg_epochs;
            l.learning_rate = a.logreg_lr;
            ClassifierConfig::LogReg(l)
        }
        ClassifierConfig::Gnb(mut n) => {
            n.var_floor = a.var_floor;
            ClassifierConfig::Gnb(n)
        }
    };
    cfg.bow.n_min = a.ngram_min;
    cfg.bow.n_max = a.ngram_max;
    cfg.bow.max_features = a.max_features;
    if let Some(p) = &a.hateful_terms {
        cfg.bow.hateful_terms = load_terms(open(p)?)?;
    }
    cfg.features_hateful_only = a.features_hateful_only;
    cfg.standardize = !a.no_standardize;
    cfg.folds = a.folds;
    cfg.infer_steps = a.infer_steps;
    cfg.seed = g.seed;
    cfg.threads = g.threads;

    let source = CorpusSource::new(&ds, parses.as_ref());
    let report = cross_validate(&source, &lexicon, &cfg, mode)?;
    if let Some(md) = &a.markdown {
        let mut text = render_report(std::slice::from_ref(&report), ReportFormat::Markdown);
        text.push_str(&format!(
            "\nconfig_hash {}, seed {}\n",
            report.config_hash, report.seed
        ));
        emit(Some(md), &text)?;
    }
    emit(a.out.as_ref(), &report_json(&report)?)?;
    if a.out.is_some() {
        eprintln!(
            "{} {}: P {:.2} R {:.2} F {:.2} (config_hash {}, seed {})",
            report.pipeline.name,
            report.mode,
            report.hateful.precision,
            report.hateful.recall,
            report.hateful.f_measure,
            report.config_hash,
            report.seed
        );
    }
    Ok(())
}

fn project(a: &ProjectArgs, _g: &GlobalArgs) -> Result<()> {
    let model_path = required(&a.model, "model", "the model file to inspect")?;
    let out = required(&a.out, "out", "the output directory")?;
    let (model, hash) = load_model(open(model_path)?)?;
    let pronouns = load_pronouns(a.pronouns.as_ref())?;
    let bands = DistanceBands::default();
    create_dir(out)?;
    export_projector(&model, &a.anchor, &pronouns, &bands, out)?;
    let near = neighbors(
        &model,
        &a.anchor,
        a.neighbors.min(model.vocab().len().saturating_sub(1)),
    )?;
    let mut table = format!(
        "Nearest tokens to `{}` (config_hash {hash:016x}, seed {})\n\n| Rank | Token | Distance | Band |\n|---|---|---|---|\n",
        a.anchor,
        model.hyper().seed
    );
    for (i, n) in near.iter().enumerate() {
        table.push_str(&format!(
            "| {} | {} | {:.4} | {} |\n",
            i + 1,
            n.token,
            n.distance,
            bands.band(n.distance)
        ));
    }
    emit(Some(&out.join("neighbors.md")), &table)?;
    if a.pca {
        let p = pca2d(model.word_vectors())?;
        let mut s = format!(
            "# explained variance {:.6} {:.6}\ntoken\tx\ty\n",
            p.variance_fractions[0], p.variance_fractions[1]
        );
        for (i, t) in model.vocab().tokens().iter().enumerate() {
            s.push_str(&format!(
                "{t}\t{}\t{}\n",
                p.coords.get(i, 0),
                p.coords.get(i, 1)
            ));
        }
        emit(Some(&out.join("pca.tsv")), &s)?;
    }
    print!("{table}");
    Ok(())
}

fn synth(a: &SynthArgs, g: &GlobalArgs) -> Result<()> {
    let out = required(&a.out, "out", "the output directory")?;
    let mut spec = match &a.spec {
        Some(p) => SyntheticSpec::from_key_values(open(p)?)?,
        None => SyntheticSpec::default(),
    };
    if let Some(n) = a.n_docs {
        spec.n_docs = n;
    }
    if let Some(p) = a.p1 {
        spec.p1 = p;
    }
    if let Some(p) = a.p0 {
        spec.p0 = p;
    }
    spec.seed = g.seed;
    spec.validate()?;
    let corpus = generate_synthetic(&spec)?;
    create_dir(out)?;
    let mut w = create(&out.join("corpus.jsonl"))?;
    write_corpus(&corpus.dataset, &mut w, CorpusFormat::Jsonl)?;
    let mut w = create(&out.join("parses.conllu"))?;
    write_conllu(&corpus.parses, &mut w)?;
    let hash = run_hash(a, g.seed);
    let planted: BTreeMap<&str, bool> = corpus
        .dataset
        .documents()
        .iter()
        .zip(&corpus.planted)
        .map(|(d, &p)| (d.id.as_str(), p))
        .collect();
    let truth = json!({
        "schema_version": 1,
        "config_hash": hash,
        "seed": g.seed,
        "spec": spec,
        "planted": planted,
    });
    emit(Some(&out.join("truth.json")), &to_json_line(&truth))?;
    println!(
        "synthetic corpus {}: {} documents, {} planted (config_hash {hash}, seed {})",
        out.display(),
        corpus.dataset.len(),
        corpus.planted.iter().filter(|&&p| p).count(),
        g.seed
    );
    Ok(())
}
