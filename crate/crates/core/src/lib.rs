//! Hate-speech classification with othering-language features.
//!
//! The pipeline reads short labeled texts and their dependency parses,
//! extracts an othering lexicon from two-sided hateful samples, augments
//! every document's token stream with dependency-pair and lexicon marker
//! tokens, learns paragraph vectors over those streams and evaluates
//! classifiers on the resulting document vectors under stratified
//! cross-validation.
//!
//! Each module maps onto one stage:
//!
//! - [`corpus`]: ingestion, tokenization, two-sided pronoun statistics
//! - [`parse`]: CoNLL-U input, relation/POS filters, fallback parser
//! - [`lexicon`]: lexicon construction and token-stream augmentation
//! - [`embedding`]: PV-DM / PV-DBOW training and inference
//! - [`classify`]: MLP, logistic regression, Gaussian naive Bayes, BoW baseline
//! - [`eval`]: folds, cross-validation, metrics, reports, synthetic corpora
//! - [`project`]: PCA, neighbors, distance bands, projector export
//! - [`cli`]: the `othering` command-line front end
//!
//! See the `examples/` directory for one runnable program per stage.

pub mod classify;
pub mod cli;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod lexicon;
pub mod matrix;
pub mod parse;
pub mod project;

pub use error::{Error, Result};
