use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{ClassPosterior, Classifier};
use crate::bits::BinaryVector;
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::seed::{rng_from_seed, Rng};

/// `1 - Σ_c (count_c / total)²`
pub fn gini_impurity(class_counts: &[usize]) -> Result<f64> {
    let total: usize = class_counts.iter().sum();
    if total == 0 {
        return Err(Error::value("gini impurity of an empty node"));
    }
    let total = total as f64;
    Ok(1.0 - class_counts.iter().map(|&c| (c as f64 / total).powi(2)).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Features examined per split; `None` examines all of them.
    pub max_features: Option<usize>,
    pub max_depth: Option<usize>,
    /// Nodes holding fewer (weighted) samples than this become leaves.
    pub min_samples_split: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_features: None,
            max_depth: None,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    /// Routes to `absent` when the feature is 0 and to `present` when it is 1.
    Split {
        feature: usize,
        absent: usize,
        present: usize,
    },
    /// Sparse class histogram `(class, weighted count)` of the training
    /// samples that reached this leaf, ascending by class.
    Leaf { counts: Vec<(usize, u32)> },
}

/// Binary classification tree over binary features, grown with the Gini
/// criterion. Node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionTree {
    n_features: usize,
    n_classes: usize,
    nodes: Vec<Node>,
}

impl DecisionTree {
    /// Grows a tree on every row of `train` with unit weights.
    pub fn fit(train: &LabeledDataset, params: &TreeParams, seed: u64) -> Result<Self> {
        let weights = vec![1; train.len()];
        let mut rng = rng_from_seed(seed);
        DecisionTree::fit_weighted(train, &weights, params, &mut rng)
    }

    /// Grows a tree where row `i` counts `weights[i]` times (0 excludes it).
    pub fn fit_weighted(
        train: &LabeledDataset,
        weights: &[u32],
        params: &TreeParams,
        rng: &mut Rng,
    ) -> Result<Self> {
        let d = train.n_features();
        let max_features = params.max_features.unwrap_or(d);
        if max_features == 0 || max_features > d {
            return Err(Error::config(format!(
                "max_features must be in [1, {d}], got {max_features}"
            )));
        }
        if weights.len() != train.len() {
            return Err(Error::value("one weight per training row required"));
        }
        let samples: Vec<usize> = (0..train.len()).filter(|&i| weights[i] > 0).collect();
        if samples.is_empty() {
            return Err(Error::value("cannot grow a tree without samples"));
        }
        let mut builder = Builder {
            rows: train.rows(),
            labels: train.labels(),
            weights,
            n_classes: train.n_classes(),
            params,
            max_features,
            feature_order: (0..d).collect(),
            rng,
        };
        Ok(DecisionTree {
            n_features: d,
            n_classes: train.n_classes(),
            nodes: builder.grow(samples),
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { absent, present, .. } => {
                    1 + walk(nodes, *absent).max(walk(nodes, *present))
                }
            }
        }
        walk(&self.nodes, 0)
    }

    /// Index of the leaf node `x` is routed to.
    pub fn leaf_index(&self, x: &BinaryVector) -> Result<usize> {
        Error::check_dim(self.n_features, x.len())?;
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { .. } => return Ok(i),
                Node::Split {
                    feature,
                    absent,
                    present,
                } => i = if x.get(*feature) { *present } else { *absent },
            }
        }
    }

    /// Adds the normalized histogram of `x`'s leaf into `acc`.
    pub(crate) fn accumulate(&self, x: &BinaryVector, acc: &mut [f64]) -> Result<()> {
        let Node::Leaf { counts } = &self.nodes[self.leaf_index(x)?] else {
            unreachable!("leaf_index returns leaves")
        };
        let total: u32 = counts.iter().map(|&(_, n)| n).sum();
        for &(c, n) in counts {
            acc[c] += f64::from(n) / f64::from(total);
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::value(format!("decision tree: {m}")));
        if self.nodes.is_empty() {
            return bad("no nodes");
        }
        for (i, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Split {
                    feature,
                    absent,
                    present,
                } => {
                    if *feature >= self.n_features {
                        return bad("split feature out of range");
                    }
                    // children are always allocated after their parent
                    if *absent <= i || *present <= i || *absent >= self.nodes.len() || *present >= self.nodes.len() {
                        return bad("invalid child index");
                    }
                }
                Node::Leaf { counts } => {
                    if counts.is_empty() || counts.iter().any(|&(c, n)| c >= self.n_classes || n == 0) {
                        return bad("invalid leaf histogram");
                    }
                }
            }
        }
        Ok(())
    }

    pub(crate) fn check(self, n_features: usize, n_classes: usize) -> Result<Self> {
        if self.n_features != n_features || self.n_classes != n_classes {
            return Err(Error::value("decision tree: shape differs from its forest"));
        }
        self.validate()?;
        Ok(self)
    }
}

impl Classifier for DecisionTree {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict(&self, x: &BinaryVector) -> Result<ClassPosterior> {
        let mut p = vec![0.0; self.n_classes];
        self.accumulate(x, &mut p)?;
        ClassPosterior::new(p)
    }
}

struct Builder<'a> {
    rows: &'a [BinaryVector],
    labels: &'a [usize],
    weights: &'a [u32],
    n_classes: usize,
    params: &'a TreeParams,
    max_features: usize,
    feature_order: Vec<usize>,
    rng: &'a mut Rng,
}

/// Weighted Gini of a split, as the fraction `num / den` whose maximum is the
/// minimum of the weighted child impurity. Kept in integers so candidate
/// splits compare exactly.
#[derive(Clone, Copy)]
struct SplitScore {
    num: u128,
    den: u128,
}

impl SplitScore {
    fn beats(&self, other: &SplitScore) -> bool {
        self.num * other.den > other.num * self.den
    }

    fn ties(&self, other: &SplitScore) -> bool {
        self.num * other.den == other.num * self.den
    }
}

impl Builder<'_> {
    fn grow(&mut self, root_samples: Vec<usize>) -> Vec<Node> {
        let mut nodes = vec![Node::Leaf { counts: Vec::new() }];
        let mut stack = vec![(0usize, root_samples, 0usize)];
        while let Some((index, samples, depth)) = stack.pop() {
            let counts = self.class_counts(&samples);
            let total: u64 = counts.iter().sum();
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let stop = pure
                || total < self.params.min_samples_split as u64
                || self.params.max_depth.is_some_and(|m| depth >= m);
            let split = if stop { None } else { self.best_split(&samples, &counts, total) };
            match split {
                None => {
                    nodes[index] = Node::Leaf {
                        counts: counts
                            .iter()
                            .enumerate()
                            .filter(|(_, &n)| n > 0)
                            .map(|(c, &n)| (c, n as u32))
                            .collect(),
                    };
                }
                Some(feature) => {
                    let (present, absent): (Vec<usize>, Vec<usize>) =
                        samples.into_iter().partition(|&s| self.rows[s].get(feature));
                    let absent_index = nodes.len();
                    let present_index = absent_index + 1;
                    nodes.push(Node::Leaf { counts: Vec::new() });
                    nodes.push(Node::Leaf { counts: Vec::new() });
                    nodes[index] = Node::Split {
                        feature,
                        absent: absent_index,
                        present: present_index,
                    };
                    stack.push((present_index, present, depth + 1));
                    stack.push((absent_index, absent, depth + 1));
                }
            }
        }
        nodes
    }

    fn class_counts(&self, samples: &[usize]) -> Vec<u64> {
        let mut counts = vec![0u64; self.n_classes];
        for &s in samples {
            counts[self.labels[s]] += u64::from(self.weights[s]);
        }
        counts
    }

    /// Best feature among the sampled candidates, ties to the smaller index.
    /// Features constant within the node do not count towards `max_features`.
    fn best_split(&mut self, samples: &[usize], counts: &[u64], total: u64) -> Option<usize> {
        let d = self.feature_order.len();
        let mut best: Option<(usize, SplitScore)> = None;
        let mut present = vec![0u64; self.n_classes];
        let mut examined = 0;
        for k in 0..d {
            if examined == self.max_features {
                break;
            }
            let feature = if self.max_features == d {
                k
            } else {
                let pick = self.rng.random_range(k..d);
                self.feature_order.swap(k, pick);
                self.feature_order[k]
            };

            present.iter_mut().for_each(|c| *c = 0);
            let mut n_present = 0u64;
            for &s in samples {
                if self.rows[s].get(feature) {
                    let w = u64::from(self.weights[s]);
                    present[self.labels[s]] += w;
                    n_present += w;
                }
            }
            let n_absent = total - n_present;
            if n_present == 0 || n_absent == 0 {
                continue;
            }
            examined += 1;

            let sq_present: u128 = present.iter().map(|&c| u128::from(c) * u128::from(c)).sum();
            let sq_absent: u128 = counts
                .iter()
                .zip(&present)
                .map(|(&c, &p)| u128::from(c - p) * u128::from(c - p))
                .sum();
            let score = SplitScore {
                num: sq_present * u128::from(n_absent) + sq_absent * u128::from(n_present),
                den: u128::from(n_present) * u128::from(n_absent),
            };
            let better = match &best {
                None => true,
                Some((f, b)) => score.beats(b) || (score.ties(b) && feature < *f),
            };
            if better {
                best = Some((feature, score));
            }
        }
        best.map(|(f, _)| f)
    }
}
