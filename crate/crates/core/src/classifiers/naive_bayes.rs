use serde::{Deserialize, Serialize};

use super::{ClassPosterior, Classifier};
use crate::bits::BinaryVector;
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

/// Bernoulli naive Bayes with additive (Laplace) smoothing.
///
/// Every symptom is an independent Bernoulli variable given the class, so an
/// absent symptom contributes `P(x_i = 0 | c)` to the score. All parameters
/// are kept as logarithms; the serialized form stores the raw counts they are
/// derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NbCounts", into = "NbCounts")]
pub struct NbModel {
    counts: NbCounts,
    log_priors: Vec<f64>,
    /// `[class][feature]` log P(x = 1 | c).
    log_on: Vec<Vec<f64>>,
    /// `[class][feature]` log P(x = 0 | c).
    log_off: Vec<Vec<f64>>,
    /// Σ_i log P(x_i = 0 | c): the score of the all-absent query.
    log_off_total: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct NbCounts {
    smoothing: f64,
    n_features: usize,
    class_counts: Vec<usize>,
    /// `[class][feature]` number of rows of the class exhibiting the feature.
    feature_counts: Vec<Vec<usize>>,
}

impl NbModel {
    pub const DEFAULT_SMOOTHING: f64 = 1.0;

    pub fn train(train: &LabeledDataset, smoothing: f64) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::value("cannot train naive bayes on an empty dataset"));
        }
        let d = train.n_features();
        let mut class_counts = vec![0usize; train.n_classes()];
        let mut feature_counts = vec![vec![0usize; d]; train.n_classes()];
        for (row, &label) in train.rows().iter().zip(train.labels()) {
            class_counts[label] += 1;
            for j in row.ones() {
                feature_counts[label][j] += 1;
            }
        }
        NbModel::from_counts(NbCounts {
            smoothing,
            n_features: d,
            class_counts,
            feature_counts,
        })
    }

    fn from_counts(counts: NbCounts) -> Result<Self> {
        let s = counts.smoothing;
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::config(format!("smoothing must be positive, got {s}")));
        }
        if counts.feature_counts.len() != counts.class_counts.len() {
            return Err(Error::value("naive bayes: count tables disagree on class count"));
        }
        let n: usize = counts.class_counts.iter().sum();
        if n == 0 {
            return Err(Error::value("naive bayes: no training rows"));
        }
        let mut log_priors = Vec::with_capacity(counts.class_counts.len());
        let mut log_on = Vec::with_capacity(counts.class_counts.len());
        let mut log_off = Vec::with_capacity(counts.class_counts.len());
        for (&nc, per_feature) in counts.class_counts.iter().zip(&counts.feature_counts) {
            if per_feature.len() != counts.n_features || per_feature.iter().any(|&k| k > nc) {
                return Err(Error::value("naive bayes: inconsistent feature counts"));
            }
            log_priors.push((nc as f64 / n as f64).ln());
            let denom = nc as f64 + 2.0 * s;
            let p_on: Vec<f64> = per_feature.iter().map(|&k| (k as f64 + s) / denom).collect();
            log_on.push(p_on.iter().map(|p| p.ln()).collect());
            // 1 - p computed from counts keeps P(on) + P(off) = 1 exact
            log_off.push(
                per_feature
                    .iter()
                    .map(|&k| ((nc - k) as f64 + s) / denom)
                    .map(f64::ln)
                    .collect::<Vec<_>>(),
            );
        }
        let log_off_total = log_off.iter().map(|row| row.iter().sum()).collect();
        Ok(NbModel {
            counts,
            log_priors,
            log_on,
            log_off,
            log_off_total,
        })
    }

    pub fn smoothing(&self) -> f64 {
        self.counts.smoothing
    }

    pub fn log_priors(&self) -> &[f64] {
        &self.log_priors
    }

    /// log P(x_feature = 1 | class)
    pub fn log_likelihood_on(&self, class: usize, feature: usize) -> f64 {
        self.log_on[class][feature]
    }

    /// log P(x_feature = 0 | class)
    pub fn log_likelihood_off(&self, class: usize, feature: usize) -> f64 {
        self.log_off[class][feature]
    }

    /// Unnormalized log joint `log P(c) + Σ_i log P(x_i | c)` for each class.
    pub fn joint_log_scores(&self, x: &BinaryVector) -> Result<Vec<f64>> {
        Error::check_dim(self.counts.n_features, x.len())?;
        Ok((0..self.log_priors.len())
            .map(|c| {
                let mut score = self.log_priors[c] + self.log_off_total[c];
                for j in x.ones() {
                    score += self.log_on[c][j] - self.log_off[c][j];
                }
                score
            })
            .collect())
    }
}

impl Classifier for NbModel {
    fn n_features(&self) -> usize {
        self.counts.n_features
    }

    fn n_classes(&self) -> usize {
        self.log_priors.len()
    }

    fn predict(&self, x: &BinaryVector) -> Result<ClassPosterior> {
        let scores = self.joint_log_scores(x)?;
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let total: f64 = exp.iter().sum();
        ClassPosterior::new(exp.into_iter().map(|e| e / total).collect())
    }
}

impl From<NbModel> for NbCounts {
    fn from(m: NbModel) -> Self {
        m.counts
    }
}

impl TryFrom<NbCounts> for NbModel {
    type Error = Error;

    fn try_from(c: NbCounts) -> Result<Self> {
        NbModel::from_counts(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::SymptomVocabulary;

    fn toy(rows: &[(&[u8], usize)], n_classes: usize) -> LabeledDataset {
        let d = rows[0].0.len();
        let vocab = SymptomVocabulary::new((0..d).map(|j| format!("s{j}"))).unwrap();
        let classes = (0..n_classes).map(|c| format!("c{c}")).collect();
        LabeledDataset::new(
            vocab,
            classes,
            rows.iter().map(|(b, _)| BinaryVector::from_bits(b).unwrap()).collect(),
            rows.iter().map(|(_, l)| *l).collect(),
        )
        .unwrap()
    }

    fn bv(bits: &[u8]) -> BinaryVector {
        BinaryVector::from_bits(bits).unwrap()
    }

    // Datasets cannot hold all-zero rows, so the single feature of the worked
    // example is paired with a constant second feature present in every row.
    // It contributes the same factor 2/3 to both classes and cancels.
    fn worked_example() -> NbModel {
        let ds = toy(&[(&[1, 1], 0), (&[0, 1], 1)], 2);
        NbModel::train(&ds, 1.0).unwrap()
    }

    #[test]
    fn laplace_estimates() {
        let m = worked_example();
        assert!((m.log_priors()[0].exp() - 0.5).abs() < 1e-12);
        assert!((m.log_likelihood_on(0, 0).exp() - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.log_likelihood_on(1, 0).exp() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn posterior_examples() {
        let m = worked_example();
        let p = m.predict(&bv(&[1, 1])).unwrap();
        assert!((p.probability(0) - 2.0 / 3.0).abs() < 1e-12);
        assert!((p.probability(1) - 1.0 / 3.0).abs() < 1e-12);
        let p = m.predict(&bv(&[0, 1])).unwrap();
        assert!((p.probability(0) - 1.0 / 3.0).abs() < 1e-12);
        assert!((p.probability(1) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn on_and_off_are_complementary() {
        let ds = toy(&[(&[1, 0, 1], 0), (&[1, 1, 0], 0), (&[0, 1, 1], 1)], 3);
        let m = NbModel::train(&ds, 0.5).unwrap();
        for c in 0..3 {
            for j in 0..3 {
                let total = m.log_likelihood_on(c, j).exp() + m.log_likelihood_off(c, j).exp();
                assert!((total - 1.0).abs() < 1e-9);
            }
        }
        let prior_mass: f64 = m.log_priors().iter().map(|l| l.exp()).sum();
        assert!((prior_mass - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_class_is_certain() {
        let ds = toy(&[(&[1, 0], 0), (&[0, 1], 0)], 1);
        let m = NbModel::train(&ds, 1.0).unwrap();
        assert!((m.log_priors()[0].exp() - 1.0).abs() < 1e-12);
        for q in [[1, 0], [0, 1], [1, 1], [0, 0]] {
            assert_eq!(m.predict(&bv(&q)).unwrap().probabilities(), &[1.0]);
        }
    }

    #[test]
    fn absent_class_gets_zero_probability() {
        let ds = toy(&[(&[1, 0], 0), (&[0, 1], 2)], 3);
        let m = NbModel::train(&ds, 1.0).unwrap();
        let p = m.predict(&bv(&[1, 0])).unwrap();
        assert_eq!(p.probability(1), 0.0);
        assert_eq!(p.argmax(), 0);
    }

    #[test]
    fn rejects_non_positive_smoothing() {
        let ds = toy(&[(&[1], 0)], 1);
        for s in [0.0, -1.0, f64::NAN] {
            assert!(matches!(NbModel::train(&ds, s), Err(Error::Config(_))));
        }
    }

    #[test]
    fn serde_round_trip() {
        let ds = toy(&[(&[1, 0, 1], 0), (&[1, 1, 0], 1)], 3);
        let m = NbModel::train(&ds, 1.0).unwrap();
        let back: NbModel = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(m, back);
    }
}
