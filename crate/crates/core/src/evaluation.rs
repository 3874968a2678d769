//! Confusion matrices and the accuracy / precision / recall metrics.
//!
//! Multiclass precision and recall are computed one-vs-rest per class and
//! macro-averaged. A zero denominator yields 0 rather than NaN.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `counts[t][p]`: samples of true class `t` predicted as `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub class_names: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

pub fn confusion_matrix(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::value(format!(
            "{} true labels but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::value("confusion matrix of zero samples"));
    }
    let mut counts = vec![vec![0u64; n_classes]; n_classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t >= n_classes || p >= n_classes {
            return Err(Error::value(format!("class index out of range for {n_classes} classes")));
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix {
        class_names: (0..n_classes).map(|c| c.to_string()).collect(),
        counts,
    })
}

impl ConfusionMatrix {
    pub fn with_class_names(mut self, names: &[String]) -> Result<Self> {
        if names.len() != self.counts.len() {
            return Err(Error::value("class name count differs from matrix size"));
        }
        self.class_names = names.to_vec();
        Ok(self)
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Row sum: number of samples whose true class is `class`.
    pub fn support(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn true_positives(&self, class: usize) -> u64 {
        self.counts[class][class]
    }

    pub fn false_positives(&self, class: usize) -> u64 {
        (0..self.n_classes())
            .filter(|&t| t != class)
            .map(|t| self.counts[t][class])
            .sum()
    }

    pub fn false_negatives(&self, class: usize) -> u64 {
        self.support(class) - self.true_positives(class)
    }

    pub fn true_negatives(&self, class: usize) -> u64 {
        self.total() - self.support(class) - self.false_positives(class)
    }

    /// Element-wise sum with another matrix over the same classes.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.n_classes() != self.n_classes() {
            return Err(Error::value("cannot merge confusion matrices of different sizes"));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(())
    }

    /// CSV with the class names as header and one row of counts per true class.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.class_names).map_err(csv_err)?;
        for row in &self.counts {
            w.write_record(row.iter().map(u64::to_string)).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::value(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::value(e.to_string())
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Fraction of samples on the diagonal.
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::value("accuracy of an empty confusion matrix"));
    }
    let trace: u64 = (0..cm.n_classes()).map(|c| cm.counts[c][c]).sum();
    Ok(trace as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub accuracy: f64,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    /// Mean precision over all classes.
    pub macro_precision: f64,
    /// Mean recall over classes with non-zero support.
    pub macro_recall: f64,
}

pub fn precision_recall(cm: &ConfusionMatrix) -> Result<MetricReport> {
    let accuracy = accuracy(cm)?;
    let n = cm.n_classes();
    let precision: Vec<f64> = (0..n)
        .map(|c| ratio(cm.true_positives(c), cm.true_positives(c) + cm.false_positives(c)))
        .collect();
    let recall: Vec<f64> = (0..n).map(|c| ratio(cm.true_positives(c), cm.support(c))).collect();
    let macro_precision = precision.iter().sum::<f64>() / n as f64;
    let supported: Vec<f64> = (0..n).filter(|&c| cm.support(c) > 0).map(|c| recall[c]).collect();
    let macro_recall = supported.iter().sum::<f64>() / supported.len() as f64;
    Ok(MetricReport {
        accuracy,
        precision,
        recall,
        macro_precision,
        macro_recall,
    })
}

/// Pooled ΣTP / Σ(TP + FP) over all classes.
pub fn micro_precision(cm: &ConfusionMatrix) -> f64 {
    let (tp, fp) = (0..cm.n_classes()).fold((0, 0), |(tp, fp), c| {
        (tp + cm.true_positives(c), fp + cm.false_positives(c))
    });
    ratio(tp, tp + fp)
}

/// Pooled ΣTP / Σ(TP + FN) over all classes.
pub fn micro_recall(cm: &ConfusionMatrix) -> f64 {
    let (tp, fn_) = (0..cm.n_classes()).fold((0, 0), |(tp, fn_), c| {
        (tp + cm.true_positives(c), fn_ + cm.false_negatives(c))
    });
    ratio(tp, tp + fn_)
}
