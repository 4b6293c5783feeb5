//! Generate a planted synthetic corpus and check the planted flags.
//!
//! ```bash
//! cargo run --example synth
//! ```

use othering::corpus::{is_two_sided, two_sided_rate, PronounConfig, TwoSidedMode};
use othering::eval::{generate_synthetic, SyntheticCorpus, SyntheticSpec};

fn main() -> othering::Result<()> {
    let spec = SyntheticSpec {
        n_docs: 400,
        seed: 3,
        ..SyntheticSpec::default()
    };
    let corpus = generate_synthetic(&spec)?;
    let pronouns = PronounConfig::default();
    let mode = TwoSidedMode::IngroupOutgroup;
    for (doc, planted) in corpus
        .dataset
        .documents()
        .iter()
        .zip(&corpus.planted)
        .take(4)
    {
        println!("{} {:?} planted={planted}: {}", doc.id, doc.label, doc.text);
    }
    let agree = corpus
        .dataset
        .documents()
        .iter()
        .zip(&corpus.planted)
        .all(|(d, &p)| is_two_sided(d, &pronouns, mode) == p);
    println!("flags recovered exactly: {agree}");
    println!(
        "rates: {:?}",
        two_sided_rate(&corpus.dataset, &pronouns, mode)?
    );
    println!("motif tokens: {:?}", SyntheticCorpus::motif_tokens());
    Ok(())
}
