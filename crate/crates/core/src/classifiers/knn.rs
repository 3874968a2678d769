use serde::{Deserialize, Serialize};

use super::{ClassPosterior, Classifier};
use crate::bits::BinaryVector;
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

/// A training row at a given distance from a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Neighbor {
    /// Squared Euclidean distance (the Hamming distance on binary rows).
    pub squared_distance: u32,
    /// Position of the row in the training set.
    pub row: usize,
}

impl Neighbor {
    pub fn distance(&self) -> f64 {
        f64::from(self.squared_distance).sqrt()
    }
}

/// Lazy nearest-neighbour classifier: keeps the training rows and votes among
/// the `n_neighbors` closest ones at prediction time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KnnRepr", into = "KnnRepr")]
pub struct KnnModel {
    n_features: usize,
    n_classes: usize,
    n_neighbors: usize,
    rows: Vec<BinaryVector>,
    labels: Vec<usize>,
}

impl KnnModel {
    pub fn train(train: &LabeledDataset, n_neighbors: usize) -> Result<Self> {
        if n_neighbors == 0 || n_neighbors > train.len() {
            return Err(Error::config(format!(
                "n_neighbors must be in [1, {}], got {n_neighbors}",
                train.len()
            )));
        }
        Ok(KnnModel {
            n_features: train.n_features(),
            n_classes: train.n_classes(),
            n_neighbors,
            rows: train.rows().to_vec(),
            labels: train.labels().to_vec(),
        })
    }

    pub fn n_neighbors(&self) -> usize {
        self.n_neighbors
    }

    pub fn n_instances(&self) -> usize {
        self.rows.len()
    }

    /// Copy of this model voting among `n_neighbors` rows instead.
    pub fn with_neighbors(&self, n_neighbors: usize) -> Result<Self> {
        if n_neighbors == 0 || n_neighbors > self.rows.len() {
            return Err(Error::config(format!(
                "n_neighbors must be in [1, {}], got {n_neighbors}",
                self.rows.len()
            )));
        }
        Ok(KnnModel {
            n_neighbors,
            ..self.clone()
        })
    }

    /// The `k` closest training rows ordered by (distance, row index).
    pub fn neighbors(&self, x: &BinaryVector, k: usize) -> Result<Vec<Neighbor>> {
        Error::check_dim(self.n_features, x.len())?;
        let k = k.min(self.rows.len());
        let mut best: Vec<Neighbor> = Vec::with_capacity(k + 1);
        for (row, r) in self.rows.iter().enumerate() {
            let d = x.hamming(r);
            // rows arrive in index order, so an equal distance never displaces
            if best.len() == k && best.last().is_some_and(|w| w.squared_distance <= d) {
                continue;
            }
            let at = best.partition_point(|n| n.squared_distance <= d);
            best.insert(
                at,
                Neighbor {
                    squared_distance: d,
                    row,
                },
            );
            best.truncate(k);
        }
        Ok(best)
    }

    /// Class frequencies among `neighbors`.
    pub fn vote(&self, neighbors: &[Neighbor]) -> Result<ClassPosterior> {
        if neighbors.is_empty() {
            return Err(Error::value("no neighbours to vote"));
        }
        let mut counts = vec![0usize; self.n_classes];
        for n in neighbors {
            counts[self.labels[n.row]] += 1;
        }
        let total = neighbors.len() as f64;
        ClassPosterior::new(counts.into_iter().map(|c| c as f64 / total).collect())
    }
}

impl Classifier for KnnModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict(&self, x: &BinaryVector) -> Result<ClassPosterior> {
        let neighbors = self.neighbors(x, self.n_neighbors)?;
        self.vote(&neighbors)
    }
}

#[derive(Serialize, Deserialize)]
struct KnnRepr {
    n_features: usize,
    n_classes: usize,
    n_neighbors: usize,
    /// Set columns of each stored row.
    instances: Vec<Vec<usize>>,
    labels: Vec<usize>,
}

impl From<KnnModel> for KnnRepr {
    fn from(m: KnnModel) -> Self {
        KnnRepr {
            n_features: m.n_features,
            n_classes: m.n_classes,
            n_neighbors: m.n_neighbors,
            instances: m.rows.iter().map(|r| r.ones().collect()).collect(),
            labels: m.labels,
        }
    }
}

impl TryFrom<KnnRepr> for KnnModel {
    type Error = Error;

    fn try_from(r: KnnRepr) -> Result<Self> {
        if r.instances.len() != r.labels.len() {
            return Err(Error::value("knn: instances and labels differ in length"));
        }
        if r.labels.iter().any(|&l| l >= r.n_classes) {
            return Err(Error::value("knn: label out of range"));
        }
        if r.n_neighbors == 0 || r.n_neighbors > r.instances.len() {
            return Err(Error::value("knn: n_neighbors out of range"));
        }
        let rows = r
            .instances
            .into_iter()
            .map(|ones| BinaryVector::from_indices(r.n_features, ones))
            .collect::<Result<_>>()?;
        Ok(KnnModel {
            n_features: r.n_features,
            n_classes: r.n_classes,
            n_neighbors: r.n_neighbors,
            rows,
            labels: r.labels,
        })
    }
}
