//! Fit the three classifiers on two Gaussian blobs and round-trip one
//! through the model file format.
//!
//! ```bash
//! cargo run --example classify
//! ```

use othering::classify::io::{load_classifier, save_classifier};
use othering::classify::{ClassifierConfig, ClassifierKind, LabeledVector};
use othering::corpus::Label;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> othering::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let data: Vec<LabeledVector> = (0..200)
        .map(|i| {
            let (cx, label) = if i % 2 == 0 {
                (2.0, Label::Hateful)
            } else {
                (-2.0, Label::NonHateful)
            };
            LabeledVector::new(
                vec![cx + rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)],
                label,
            )
        })
        .collect();
    for kind in [
        ClassifierKind::Mlp,
        ClassifierKind::LogReg,
        ClassifierKind::Gnb,
    ] {
        let model = ClassifierConfig::default_for(kind).train(&data)?;
        let correct = data
            .iter()
            .filter(|x| {
                model
                    .predict(&x.features)
                    .map(|p| p.label == x.label)
                    .unwrap_or(false)
            })
            .count();
        println!("{kind}: {correct}/{} training points correct", data.len());

        let mut bytes = Vec::new();
        save_classifier(&model, &mut bytes)?;
        let reloaded = load_classifier(&bytes[..])?;
        println!(
            "  p(hateful | (1, 0)) = {:.3}",
            reloaded.predict(&[1.0, 0.0])?.probability
        );
    }
    Ok(())
}
