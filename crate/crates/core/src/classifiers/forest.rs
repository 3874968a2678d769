use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, TreeParams};
use super::{ClassPosterior, Classifier};
use crate::bits::BinaryVector;
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RfParams {
    pub n_trees: usize,
    /// Features examined per split; `None` means `floor(sqrt(D))`.
    pub max_features: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Draw a bootstrap sample per tree. Disabling it grows every tree on the
    /// full training set.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for RfParams {
    fn default() -> Self {
        RfParams {
            n_trees: 100,
            max_features: None,
            max_depth: None,
            min_samples_split: 2,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl RfParams {
    /// `max_features` resolved against `n_features`.
    pub fn resolved_max_features(&self, n_features: usize) -> usize {
        self.max_features
            .unwrap_or_else(|| ((n_features as f64).sqrt().floor() as usize).max(1))
    }
}

/// Multiplicity of each of `n_rows` rows in the bootstrap sample of tree
/// `tree` of a forest seeded with `seed`.
pub fn bootstrap_counts(seed: u64, tree: usize, n_rows: usize) -> Vec<u32> {
    let mut rng = rng_from_seed(derive_seed(derive_seed(seed, tree as u64), 0));
    let mut counts = vec![0u32; n_rows];
    for _ in 0..n_rows {
        counts[rng.random_range(0..n_rows)] += 1;
    }
    counts
}

/// Random forest: bootstrap-sampled Gini trees whose leaf distributions are
/// averaged at prediction time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RfRepr", into = "RfRepr")]
pub struct RfModel {
    params: RfParams,
    n_features: usize,
    n_classes: usize,
    trees: Vec<DecisionTree>,
}

impl RfModel {
    pub fn train(train: &LabeledDataset, params: &RfParams) -> Result<Self> {
        if params.n_trees == 0 {
            return Err(Error::config("n_trees must be at least 1"));
        }
        let d = train.n_features();
        let max_features = params.resolved_max_features(d);
        if max_features == 0 || max_features > d {
            return Err(Error::config(format!(
                "max_features must be in [1, {d}], got {max_features}"
            )));
        }
        if train.is_empty() {
            return Err(Error::value("cannot train a forest on an empty dataset"));
        }
        let tree_params = TreeParams {
            max_features: Some(max_features),
            max_depth: params.max_depth,
            min_samples_split: params.min_samples_split,
        };
        let trees = (0..params.n_trees)
            .map(|t| {
                let weights = if params.bootstrap {
                    bootstrap_counts(params.seed, t, train.len())
                } else {
                    vec![1; train.len()]
                };
                let mut rng = rng_from_seed(derive_seed(derive_seed(params.seed, t as u64), 1));
                DecisionTree::fit_weighted(train, &weights, &tree_params, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RfModel {
            params: RfParams {
                max_features: Some(max_features),
                ..*params
            },
            n_features: d,
            n_classes: train.n_classes(),
            trees,
        })
    }

    pub fn params(&self) -> &RfParams {
        &self.params
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }
}

impl Classifier for RfModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict(&self, x: &BinaryVector) -> Result<ClassPosterior> {
        Error::check_dim(self.n_features, x.len())?;
        let mut p = vec![0.0; self.n_classes];
        for tree in &self.trees {
            tree.accumulate(x, &mut p)?;
        }
        let n = self.trees.len() as f64;
        p.iter_mut().for_each(|v| *v /= n);
        ClassPosterior::new(p)
    }
}

#[derive(Serialize, Deserialize)]
struct RfRepr {
    params: RfParams,
    n_features: usize,
    n_classes: usize,
    trees: Vec<DecisionTree>,
}

impl From<RfModel> for RfRepr {
    fn from(m: RfModel) -> Self {
        RfRepr {
            params: m.params,
            n_features: m.n_features,
            n_classes: m.n_classes,
            trees: m.trees,
        }
    }
}

impl TryFrom<RfRepr> for RfModel {
    type Error = Error;

    fn try_from(r: RfRepr) -> Result<Self> {
        if r.trees.is_empty() || r.trees.len() != r.params.n_trees {
            return Err(Error::value("random forest: tree count mismatch"));
        }
        let trees = r
            .trees
            .into_iter()
            .map(|t| t.check(r.n_features, r.n_classes))
            .collect::<Result<_>>()?;
        Ok(RfModel {
            params: r.params,
            n_features: r.n_features,
            n_classes: r.n_classes,
            trees,
        })
    }
}
