//! Symptom-based disease prediction.
//!
//! Binary symptom vectors are classified by K-nearest neighbours, Bernoulli
//! naive Bayes and a random forest; their posteriors are fused by a voting
//! ensemble weighted with each member's mean holdout accuracy.

pub mod bits;
pub mod classifiers;
pub mod dataset;
pub mod ensemble;
mod error;
pub mod evaluation;
pub mod model;
pub mod recommender;
pub mod seed;

pub use bits::{euclidean_distance, BinaryVector};
pub use classifiers::{ClassPosterior, Classifier};
pub use dataset::{LabeledDataset, SplitSpec, SymptomVocabulary};
pub use ensemble::{EnsembleModel, Member};
pub use error::{Error, Result};
