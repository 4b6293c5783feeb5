//! Cross-validate the lexicon-augmented pipeline against its embedding-only
//! and bag-of-words baselines and print the report table.
//!
//! ```bash
//! cargo run --release --example evaluate
//! ```

use othering::corpus::PronounConfig;
use othering::eval::{
    cross_validate, generate_synthetic, render_report, CorpusSource, EvalMode, LexiconSource,
    PipelineConfig, ReportFormat, SyntheticSpec,
};
use othering::lexicon::LexiconConfig;
use othering::parse::index_parses;

fn main() -> othering::Result<()> {
    let corpus = generate_synthetic(&SyntheticSpec {
        n_docs: 400,
        ..SyntheticSpec::default()
    })?;
    let parses = index_parses(corpus.parses.clone());
    let source = CorpusSource::new(&corpus.dataset, Some(&parses));
    let lexicon = LexiconSource::FromEval {
        pronouns: PronounConfig::default(),
        config: LexiconConfig::default(),
    };
    let mut reports = Vec::new();
    for (name, mode) in [
        ("lexicon+pvdm+mlp", EvalMode::Transductive),
        ("lexicon+pvdm+mlp", EvalMode::Inductive),
        ("pvdm+mlp", EvalMode::Transductive),
        ("bow+logreg", EvalMode::Transductive),
    ] {
        let mut cfg = PipelineConfig::new(name.parse()?);
        cfg.hyper.dim = 50;
        cfg.hyper.lr_start = 0.05;
        cfg.folds = 5;
        reports.push(cross_validate(&source, &lexicon, &cfg, mode)?);
    }
    print!("{}", render_report(&reports, ReportFormat::Markdown));
    Ok(())
}
