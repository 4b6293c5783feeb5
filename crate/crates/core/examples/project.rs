//! Inspect the neighbourhood of "us" in a lexicon-augmented model and write
//! embedding-projector files.
//!
//! ```bash
//! cargo run --release --example project
//! ```

use othering::corpus::PronounConfig;
use othering::embedding::{train, EmbedHyper};
use othering::eval::{generate_synthetic, SyntheticSpec};
use othering::lexicon::{augment, build_lexicon_from_dataset, AugmentOptions, LexiconConfig};
use othering::parse::index_parses;
use othering::project::{export_projector, neighbors, pca2d, DistanceBands};

fn main() -> othering::Result<()> {
    let corpus = generate_synthetic(&SyntheticSpec::default())?;
    let parses = index_parses(corpus.parses.clone());
    let pronouns = PronounConfig::default();
    let lexicon = build_lexicon_from_dataset(
        &corpus.dataset,
        &parses,
        &pronouns,
        &LexiconConfig::default(),
    )?;
    let docs = corpus
        .dataset
        .documents()
        .iter()
        .map(|d| {
            Ok((
                d.id.clone(),
                augment(d, &parses[&d.id], &lexicon, &AugmentOptions::default())?.stream(),
            ))
        })
        .collect::<othering::Result<Vec<_>>>()?;
    let model = train(
        &docs,
        &EmbedHyper {
            dim: 50,
            lr_start: 0.05,
            ..EmbedHyper::default()
        },
    )?;

    let bands = DistanceBands::default();
    for n in neighbors(&model, "us", 10)? {
        println!(
            "{:<32} {:.3} {}",
            n.token,
            n.distance,
            bands.band(n.distance)
        );
    }
    let pca = pca2d(model.word_vectors())?;
    println!(
        "first two components explain {:.3} and {:.3}",
        pca.variance_fractions[0], pca.variance_fractions[1]
    );

    let dir = std::env::temp_dir().join("othering-projector");
    std::fs::create_dir_all(&dir)?;
    let files = export_projector(&model, "us", &pronouns, &bands, &dir)?;
    println!(
        "{} rows written to {} and {}",
        files.rows,
        files.vectors.display(),
        files.metadata.display()
    );
    Ok(())
}
