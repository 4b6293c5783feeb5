//! Classifier capacity, closed-form posteriors and prediction contracts.

mod support;

use othering::classify::{
    fit_gnb, predict, train_gnb, train_logreg, train_mlp, GnbConfig, LabeledVector, LogRegConfig,
    MlpConfig,
};
use othering::corpus::Label;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::blobs;

fn accuracy(model: &othering::classify::ClassifierModel, data: &[LabeledVector]) -> f64 {
    let right = data
        .iter()
        .filter(|ex| predict(model, &ex.features).unwrap().label == ex.label)
        .count();
    right as f64 / data.len() as f64
}

fn xor() -> Vec<LabeledVector> {
    [
        ([0.0, 0.0], 0),
        ([1.0, 1.0], 0),
        ([0.0, 1.0], 1),
        ([1.0, 0.0], 1),
    ]
    .iter()
    .map(|(x, y)| LabeledVector::new(x.to_vec(), Label::from_u8(*y).unwrap()))
    .collect()
}

#[test]
fn mlp_fits_xor_for_some_seed() {
    let data = xor();
    let best = (0..10)
        .map(|seed| {
            let cfg = MlpConfig {
                epochs: 5000,
                seed,
                ..MlpConfig::default()
            };
            accuracy(&train_mlp(&data, &cfg).unwrap(), &data)
        })
        .fold(0.0, f64::max);
    assert_eq!(best, 1.0);
}

#[test]
fn mlp_separates_blobs() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data = blobs(&mut rng, 100, 4.0);
    let model = train_mlp(&data, &MlpConfig::default()).unwrap();
    assert!(accuracy(&model, &data) >= 0.99);
}

#[test]
fn logreg_separates_blobs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let data = blobs(&mut rng, 100, 4.0);
    let model = train_logreg(&data, &LogRegConfig::default()).unwrap();
    assert!(accuracy(&model, &data) >= 0.99);
}

#[test]
fn training_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let data = blobs(&mut rng, 40, 1.0);
    let cfg = MlpConfig {
        seed: 11,
        ..MlpConfig::default()
    };
    assert_eq!(
        train_mlp(&data, &cfg).unwrap(),
        train_mlp(&data, &cfg).unwrap()
    );
    let lr = LogRegConfig::default();
    assert_eq!(
        train_logreg(&data, &lr).unwrap(),
        train_logreg(&data, &lr).unwrap()
    );
}

fn gaussian(x: f64, mean: f64, var: f64) -> f64 {
    (-(x - mean) * (x - mean) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

#[test]
fn gnb_posterior_matches_closed_form() {
    let pts = |v: &[[f64; 2]], y: u8| -> Vec<LabeledVector> {
        v.iter()
            .map(|p| LabeledVector::new(p.to_vec(), Label::from_u8(y).unwrap()))
            .collect()
    };
    let mut data = pts(&[[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [2.0, 2.0]], 0);
    data.extend(pts(
        &[[3.0, 1.0], [5.0, 1.0], [3.0, 3.0], [5.0, 3.0], [4.0, 2.0]],
        1,
    ));
    // class 0: mean (1, 1), variance (1, 1), prior 4/9
    // class 1: mean (4, 2), variance (0.8, 0.8), prior 5/9
    let x = [2.5, 1.5];
    let joint0 = 4.0 / 9.0 * gaussian(x[0], 1.0, 1.0) * gaussian(x[1], 1.0, 1.0);
    let joint1 = 5.0 / 9.0 * gaussian(x[0], 4.0, 0.8) * gaussian(x[1], 2.0, 0.8);
    let expected = joint1 / (joint0 + joint1);

    let gnb = fit_gnb(&data, &GnbConfig::default()).unwrap();
    assert!((gnb.posterior(&x)[1] - expected).abs() < 1e-9);
    let model = train_gnb(&data, &GnbConfig::default()).unwrap();
    assert!((predict(&model, &x).unwrap().probability - expected).abs() < 1e-9);
}

#[test]
fn gnb_posteriors_sum_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let data = blobs(&mut rng, 30, 0.7);
    let gnb = fit_gnb(&data, &GnbConfig::default()).unwrap();
    for _ in 0..200 {
        let x = [rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0)];
        let [p0, p1] = gnb.posterior(&x);
        assert!((p0 + p1 - 1.0).abs() < 1e-12);
    }
}

#[test]
fn predictions_are_probabilities_and_reject_bad_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let data = blobs(&mut rng, 30, 0.5);
    let models = [
        train_mlp(&data, &MlpConfig::default()).unwrap(),
        train_logreg(&data, &LogRegConfig::default()).unwrap(),
        train_gnb(&data, &GnbConfig::default()).unwrap(),
    ];
    for m in &models {
        for _ in 0..50 {
            let x = [rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)];
            let p = predict(m, &x).unwrap();
            assert!((0.0..=1.0).contains(&p.probability));
            assert_eq!(p.label.is_hateful(), p.probability >= m.threshold);
        }
        let err = predict(m, &[1.0]).unwrap_err();
        assert!(matches!(
            err,
            othering::Error::Dimension {
                expected: 2,
                actual: 1
            }
        ));
    }
}
