//! Stratified folds over random label vectors.

mod support;

use othering::corpus::{Dataset, Document, Label};
use othering::eval::{stratified_folds, stratified_kfold};
use support::checks::stratification_holds;

#[test]
fn hundred_random_datasets() {
    for seed in 0..100 {
        if let Err(e) = stratification_holds(seed) {
            panic!("dataset {seed}: {e}");
        }
    }
}

#[test]
fn dataset_entry_point_matches_label_entry_point() {
    let docs: Vec<Document> = (0..40)
        .map(|i| {
            let label = if i % 4 == 0 {
                Label::Hateful
            } else {
                Label::NonHateful
            };
            Document::new(format!("d{i}"), "x", Some(label))
        })
        .collect();
    let ds = Dataset::new("s", docs).unwrap();
    let a = stratified_kfold(&ds, 10, 5).unwrap();
    let b = stratified_folds(&ds.labels().unwrap(), 10, 5).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, stratified_kfold(&ds, 10, 5).unwrap());
    assert_ne!(a, stratified_kfold(&ds, 10, 6).unwrap());
}

#[test]
fn unlabeled_dataset_is_rejected() {
    let docs = vec![
        Document::new("a", "x", None),
        Document::new("b", "y", Some(Label::Hateful)),
    ];
    let ds = Dataset::new("u", docs).unwrap();
    assert!(stratified_kfold(&ds, 2, 0).is_err());
}
