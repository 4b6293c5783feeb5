//! Train PV-DM and PV-DBOW paragraph vectors, save and reload a model, and
//! infer a vector for an unseen document.
//!
//! ```bash
//! cargo run --release --example embed
//! ```

use othering::embedding::io::{load_model, save_model};
use othering::embedding::{cosine_distance, infer_vector, train, EmbedHyper, EmbedMode};
use othering::eval::{generate_synthetic, SyntheticSpec};

fn main() -> othering::Result<()> {
    let corpus = generate_synthetic(&SyntheticSpec {
        n_docs: 300,
        ..SyntheticSpec::default()
    })?;
    let docs: Vec<(String, Vec<String>)> = corpus
        .dataset
        .documents()
        .iter()
        .map(|d| (d.id.clone(), d.tokens.clone()))
        .collect();
    for mode in [EmbedMode::Pvdm, EmbedMode::Pvdbow] {
        let hyper = EmbedHyper {
            dim: 32,
            epochs: 10,
            lr_start: 0.05,
            mode,
            ..EmbedHyper::default()
        };
        let model = train(&docs, &hyper)?;
        println!(
            "{mode}: {} tokens, loss {:.3} -> {:.3}",
            model.vocab().len(),
            model.epoch_losses()[0],
            model.epoch_losses().last().unwrap()
        );

        let mut bytes = Vec::new();
        save_model(&model, 0, &mut bytes)?;
        let (reloaded, _) = load_model(&bytes[..])?;
        let unseen = &docs[0].1;
        let inferred = infer_vector(&reloaded, unseen, 20, 0.05, 1)?;
        let trained = reloaded.doc_vector(&docs[0].0).unwrap();
        println!(
            "  inferred vs trained distance {:.3}",
            cosine_distance(&inferred.vector, trained)?
        );
    }
    Ok(())
}
