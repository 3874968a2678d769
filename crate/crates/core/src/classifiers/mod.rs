//! The three member classifiers. Each one maps a binary symptom vector to a
//! [`ClassPosterior`] over the disease classes it was trained on.

mod forest;
mod knn;
mod naive_bayes;
mod tree;

pub use forest::{bootstrap_counts, RfModel, RfParams};
pub use knn::{KnnModel, Neighbor};
pub use naive_bayes::NbModel;
pub use tree::{gini_impurity, DecisionTree, Node, TreeParams};

use serde::{Deserialize, Serialize};

use crate::bits::BinaryVector;
use crate::error::{Error, Result};

/// Tolerance on the total mass of a posterior.
pub const POSTERIOR_TOLERANCE: f64 = 1e-9;

/// Probability distribution over classes, indexed by class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ClassPosterior {
    probabilities: Vec<f64>,
    argmax: usize,
}

impl ClassPosterior {
    /// Validates that `probabilities` is a distribution (non-negative, sums
    /// to one within [`POSTERIOR_TOLERANCE`]).
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::value("posterior over zero classes"));
        }
        if let Some(p) = probabilities.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::value(format!("invalid probability {p}")));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > POSTERIOR_TOLERANCE {
            return Err(Error::value(format!("probabilities sum to {total}")));
        }
        let argmax = argmax(&probabilities);
        Ok(ClassPosterior {
            probabilities,
            argmax,
        })
    }

    /// All mass on `class`.
    pub fn one_hot(n_classes: usize, class: usize) -> Self {
        let mut probabilities = vec![0.0; n_classes];
        probabilities[class] = 1.0;
        ClassPosterior {
            probabilities,
            argmax: class,
        }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, class: usize) -> f64 {
        self.probabilities[class]
    }

    pub fn n_classes(&self) -> usize {
        self.probabilities.len()
    }

    /// Most probable class; ties go to the smaller index.
    pub fn argmax(&self) -> usize {
        self.argmax
    }

    /// Probability of [`argmax`](Self::argmax).
    pub fn confidence(&self) -> f64 {
        self.probabilities[self.argmax]
    }

    /// The `k` most probable classes, descending, ties by smaller index.
    pub fn top_k(&self, k: usize) -> Vec<(usize, f64)> {
        let mut ranked: Vec<(usize, f64)> = self.probabilities.iter().copied().enumerate().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked.truncate(k);
        ranked
    }
}

impl TryFrom<Vec<f64>> for ClassPosterior {
    type Error = Error;

    fn try_from(p: Vec<f64>) -> Result<Self> {
        ClassPosterior::new(p)
    }
}

impl From<ClassPosterior> for Vec<f64> {
    fn from(p: ClassPosterior) -> Self {
        p.probabilities
    }
}

/// Index of the first maximal value.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Common interface of trained classifiers.
pub trait Classifier {
    fn n_features(&self) -> usize;

    fn n_classes(&self) -> usize;

    fn predict(&self, x: &BinaryVector) -> Result<ClassPosterior>;

    fn predict_class(&self, x: &BinaryVector) -> Result<usize> {
        self.predict(x).map(|p| p.argmax())
    }
}
