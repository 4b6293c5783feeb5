//! Build an othering lexicon from a synthetic source corpus, save it, and
//! augment one document's token stream.
//!
//! ```bash
//! cargo run --example lexicon
//! ```

use othering::corpus::PronounConfig;
use othering::eval::{generate_synthetic, SyntheticSpec};
use othering::lexicon::{
    augment, build_lexicon_from_dataset, load_lexicon, save_lexicon, AugmentOptions, LexiconConfig,
};
use othering::parse::index_parses;

fn main() -> othering::Result<()> {
    let source = generate_synthetic(&SyntheticSpec {
        n_docs: 300,
        ..SyntheticSpec::default()
    })?;
    let parses = index_parses(source.parses.clone());
    let lexicon = build_lexicon_from_dataset(
        &source.dataset,
        &parses,
        &PronounConfig::default(),
        &LexiconConfig::default(),
    )?;
    let p = lexicon.provenance();
    println!(
        "{} dependency entries, {} words, {} pronouns from {} two-sided hateful documents",
        p.dep_count, p.word_count, p.pronoun_count, p.kept_docs
    );

    let mut file = Vec::new();
    save_lexicon(&lexicon, &mut file)?;
    let reloaded = load_lexicon(&file[..])?;
    assert_eq!(reloaded.dep_entries(), lexicon.dep_entries());

    let doc = &source.dataset.documents()[0];
    let augmented = augment(doc, &parses[&doc.id], &reloaded, &AugmentOptions::default())?;
    println!("base:     {:?}", augmented.base_tokens);
    println!("features: {:?}", augmented.feature_tokens);
    println!("hits:     {:?}", augmented.lexicon_hits);
    Ok(())
}
