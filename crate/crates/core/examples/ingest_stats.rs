//! Load a corpus and report two-sided pronoun rates per class.
//!
//! ```bash
//! cargo run --example ingest_stats
//! ```

use othering::corpus::{
    load_corpus, two_sided_rate, CorpusFormat, PronounConfig, TokenizerConfig, TwoSidedMode,
};

const CORPUS: &str = r#"{"id": "a", "text": "We should send them all home", "label": 1}
{"id": "b", "text": "They want our country, we say no", "label": 1}
{"id": "c", "text": "Lovely weather in town today", "label": 0}
{"id": "d", "text": "We met them at the match @friend #sunday", "label": 0}
"#;

fn main() -> othering::Result<()> {
    let dataset = load_corpus(
        CORPUS.as_bytes(),
        CorpusFormat::Jsonl,
        "inline",
        &TokenizerConfig::default(),
    )?;
    for doc in dataset.documents() {
        println!("{} {:?} {:?}", doc.id, doc.label, doc.tokens);
    }
    let pronouns = PronounConfig::default();
    for mode in [TwoSidedMode::IngroupOutgroup, TwoSidedMode::AnyTwoPronouns] {
        for (label, rate) in two_sided_rate(&dataset, &pronouns, mode)? {
            println!("{mode} label {label}: {rate:.2}");
        }
    }
    Ok(())
}
