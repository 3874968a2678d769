//! Mean-accuracy weighted soft voting over the three member classifiers, the
//! repeated-holdout protocol that produces the weights, and the neighbour
//! sweep used to pick `N` for the K-NN member.
//!
//! Both the weight computation and the sweep evaluate `alpha` independent
//! stratified holdout splits. Run `r` uses the split seed
//! `derive_seed(seed, r)`, so the two procedures see the same partitions and
//! a run's outcome never depends on the other runs.

use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::bits::BinaryVector;
use crate::classifiers::{ClassPosterior, Classifier, KnnModel, NbModel, RfModel, RfParams};
use crate::dataset::{split_indices, LabeledDataset, SplitSpec, SymptomVocabulary};
use crate::error::{Error, Result};
use crate::evaluation::{accuracy, confusion_matrix, precision_recall, ConfusionMatrix};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Member {
    Knn,
    NaiveBayes,
    RandomForest,
}

impl Member {
    /// Members in weight-vector order.
    pub const ALL: [Member; 3] = [Member::Knn, Member::NaiveBayes, Member::RandomForest];

    pub fn name(self) -> &'static str {
        match self {
            Member::Knn => "knn",
            Member::NaiveBayes => "naive_bayes",
            Member::RandomForest => "random_forest",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Member {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Weighted mean of member posteriors, normalized by the total weight.
pub fn weighted_vote(posteriors: &[ClassPosterior], weights: &[f64]) -> Result<ClassPosterior> {
    if posteriors.is_empty() || posteriors.len() != weights.len() {
        return Err(Error::value("one weight per member posterior required"));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::config("weights must be finite and non-negative"));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::config("all ensemble weights are zero"));
    }
    let n_classes = posteriors[0].n_classes();
    if posteriors.iter().any(|p| p.n_classes() != n_classes) {
        return Err(Error::value("member posteriors disagree on class count"));
    }
    let mut fused = vec![0.0; n_classes];
    for (p, &w) in posteriors.iter().zip(weights) {
        for (acc, &pc) in fused.iter_mut().zip(p.probabilities()) {
            *acc += w * pc;
        }
    }
    fused.iter_mut().for_each(|v| *v /= total);
    ClassPosterior::new(fused)
}

/// Hyperparameters of the three members.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemberParams {
    pub knn_neighbors: usize,
    pub nb_smoothing: f64,
    pub rf: RfParams,
}

impl Default for MemberParams {
    fn default() -> Self {
        MemberParams {
            knn_neighbors: 5,
            nb_smoothing: NbModel::DEFAULT_SMOOTHING,
            rf: RfParams::default(),
        }
    }
}

/// The three trained members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Members {
    pub knn: KnnModel,
    pub naive_bayes: NbModel,
    pub random_forest: RfModel,
}

impl Members {
    pub fn train(train: &LabeledDataset, params: &MemberParams) -> Result<Self> {
        Ok(Members {
            knn: KnnModel::train(train, params.knn_neighbors)?,
            naive_bayes: NbModel::train(train, params.nb_smoothing)?,
            random_forest: RfModel::train(train, &params.rf)?,
        })
    }

    pub fn get(&self, member: Member) -> &dyn Classifier {
        match member {
            Member::Knn => &self.knn,
            Member::NaiveBayes => &self.naive_bayes,
            Member::RandomForest => &self.random_forest,
        }
    }

    /// Posterior of every member, in [`Member::ALL`] order.
    pub fn posteriors(&self, x: &BinaryVector) -> Result<Vec<ClassPosterior>> {
        Member::ALL.iter().map(|&m| self.get(m).predict(x)).collect()
    }
}

/// Trained members plus their voting weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    vocabulary: SymptomVocabulary,
    class_names: Vec<String>,
    members: Members,
    /// In [`Member::ALL`] order.
    weights: [f64; 3],
}

impl EnsembleModel {
    pub fn new(
        vocabulary: SymptomVocabulary,
        class_names: Vec<String>,
        members: Members,
        weights: [f64; 3],
    ) -> Result<Self> {
        for m in Member::ALL {
            let c = members.get(m);
            if c.n_features() != vocabulary.len() || c.n_classes() != class_names.len() {
                return Err(Error::value(format!("{m} was trained on a different feature or class space")));
            }
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || weights.iter().all(|&w| w == 0.0) {
            return Err(Error::config("weights must be non-negative with at least one positive"));
        }
        Ok(EnsembleModel {
            vocabulary,
            class_names,
            members,
            weights,
        })
    }

    pub fn vocabulary(&self) -> &SymptomVocabulary {
        &self.vocabulary
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn members(&self) -> &Members {
        &self.members
    }

    pub fn weights(&self) -> [f64; 3] {
        self.weights
    }

    pub fn weight(&self, member: Member) -> f64 {
        self.weights[member.index()]
    }

    /// Member posteriors and the fused posterior for `x`.
    pub fn predict_detailed(&self, x: &BinaryVector) -> Result<(Vec<ClassPosterior>, ClassPosterior)> {
        let posteriors = self.members.posteriors(x)?;
        let fused = weighted_vote(&posteriors, &self.weights)?;
        Ok((posteriors, fused))
    }
}

impl Classifier for EnsembleModel {
    fn n_features(&self) -> usize {
        self.vocabulary.len()
    }

    fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    fn predict(&self, x: &BinaryVector) -> Result<ClassPosterior> {
        self.predict_detailed(x).map(|(_, fused)| fused)
    }
}

/// Repeated stratified holdout settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub alpha: usize,
    pub seed: u64,
    pub test_fraction: f64,
    pub stratified: bool,
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol {
            alpha: 50,
            seed: 0,
            test_fraction: 0.2,
            stratified: true,
        }
    }
}

impl Protocol {
    fn validate(&self) -> Result<()> {
        if self.alpha == 0 {
            return Err(Error::config("alpha must be at least 1"));
        }
        Ok(())
    }

    /// Seed of run `run` (0-based).
    pub fn run_seed(&self, run: usize) -> u64 {
        derive_seed(self.seed, run as u64)
    }

    pub fn split_spec(&self, run: usize) -> SplitSpec {
        SplitSpec {
            test_fraction: self.test_fraction,
            seed: self.run_seed(run),
            stratified: self.stratified,
        }
    }
}

/// Member posteriors on the held-out rows of one run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub test_labels: Vec<usize>,
    /// `[member][test row]`, members in [`Member::ALL`] order.
    pub posteriors: Vec<Vec<ClassPosterior>>,
}

impl RunOutcome {
    pub fn member_predictions(&self, member: Member) -> Vec<usize> {
        self.posteriors[member.index()].iter().map(ClassPosterior::argmax).collect()
    }

    pub fn ensemble_predictions(&self, weights: &[f64; 3]) -> Result<Vec<usize>> {
        (0..self.test_labels.len())
            .map(|i| {
                let ps: Vec<ClassPosterior> =
                    self.posteriors.iter().map(|per_member| per_member[i].clone()).collect();
                weighted_vote(&ps, weights).map(|p| p.argmax())
            })
            .collect()
    }
}

/// Outcome of every run of the holdout protocol.
#[derive(Debug, Clone)]
pub struct ProtocolRuns {
    pub protocol: Protocol,
    pub n_classes: usize,
    pub runs: Vec<RunOutcome>,
}

/// Trains all members on each of the `alpha` splits and records their test
/// posteriors. The forest of run `r` is seeded with `derive_seed(run_seed, 1)`;
/// `params.rf.seed` is not used.
pub fn run_protocol(ds: &LabeledDataset, protocol: &Protocol, params: &MemberParams) -> Result<ProtocolRuns> {
    protocol.validate()?;
    let runs = (0..protocol.alpha)
        .map(|r| {
            let spec = protocol.split_spec(r);
            let idx = split_indices(ds.labels(), &spec)?;
            let train = ds.subset(&idx.train);
            let test = ds.subset(&idx.test);
            let run_params = MemberParams {
                rf: RfParams {
                    seed: derive_seed(spec.seed, 1),
                    ..params.rf
                },
                ..*params
            };
            let members = Members::train(&train, &run_params)?;
            let posteriors = Member::ALL
                .iter()
                .map(|&m| {
                    let model = members.get(m);
                    test.rows().iter().map(|x| model.predict(x)).collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(RunOutcome {
                test_labels: test.labels().to_vec(),
                posteriors,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProtocolRuns {
        protocol: *protocol,
        n_classes: ds.n_classes(),
        runs,
    })
}

fn mean_and_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberScore {
    pub member: Member,
    /// Test accuracy of each run.
    pub samples: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation of `samples`.
    pub std_dev: f64,
}

/// Mean test accuracy of each member over the protocol runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightReport {
    pub alpha: usize,
    pub seed: u64,
    pub members: Vec<MemberScore>,
}

impl WeightReport {
    /// Mean accuracies in [`Member::ALL`] order.
    pub fn weights(&self) -> [f64; 3] {
        let mut w = [0.0; 3];
        for s in &self.members {
            w[s.member.index()] = s.mean;
        }
        w
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("member,weight\n");
        for s in &self.members {
            out.push_str(&format!("{},{}\n", s.member, s.mean));
        }
        out
    }
}

/// Accuracy, macro precision and macro recall averaged over the runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub name: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
}

impl ProtocolRuns {
    fn confusion(&self, run: &RunOutcome, predictions: &[usize]) -> Result<ConfusionMatrix> {
        confusion_matrix(&run.test_labels, predictions, self.n_classes)
    }

    pub fn member_accuracies(&self, member: Member) -> Result<Vec<f64>> {
        self.runs
            .iter()
            .map(|run| accuracy(&self.confusion(run, &run.member_predictions(member))?))
            .collect()
    }

    pub fn weight_report(&self) -> Result<WeightReport> {
        let members = Member::ALL
            .iter()
            .map(|&member| {
                let samples = self.member_accuracies(member)?;
                let (mean, std_dev) = mean_and_std(&samples);
                Ok(MemberScore {
                    member,
                    samples,
                    mean,
                    std_dev,
                })
            })
            .collect::<Result<_>>()?;
        Ok(WeightReport {
            alpha: self.protocol.alpha,
            seed: self.protocol.seed,
            members,
        })
    }

    fn score_row(&self, name: &str, predictions: impl Fn(&RunOutcome) -> Result<Vec<usize>>) -> Result<ScoreRow> {
        let (mut a, mut p, mut r) = (0.0, 0.0, 0.0);
        for run in &self.runs {
            let report = precision_recall(&self.confusion(run, &predictions(run)?)?)?;
            a += report.accuracy;
            p += report.macro_precision;
            r += report.macro_recall;
        }
        let n = self.runs.len() as f64;
        Ok(ScoreRow {
            name: name.to_string(),
            accuracy: a / n,
            precision: p / n,
            recall: r / n,
        })
    }

    /// One row per member followed by the ensemble fused with `weights`.
    pub fn summary(&self, weights: &[f64; 3]) -> Result<Vec<ScoreRow>> {
        let mut rows = Member::ALL
            .iter()
            .map(|&m| self.score_row(m.name(), |run| Ok(run.member_predictions(m))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(self.score_row("ensemble", |run| run.ensemble_predictions(weights))?);
        Ok(rows)
    }
}

/// Mean test accuracy of each member over `protocol.alpha` holdout runs.
pub fn compute_weights(ds: &LabeledDataset, protocol: &Protocol, params: &MemberParams) -> Result<WeightReport> {
    run_protocol(ds, protocol, params)?.weight_report()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub n: usize,
    pub mean_score: f64,
    /// Test accuracy of each run.
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub alpha: usize,
    pub seed: u64,
    pub entries: Vec<SweepEntry>,
    /// `n` of the highest mean, ties to the smaller `n`.
    pub best_n: usize,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,mean_score\n");
        for e in &self.entries {
            out.push_str(&format!("{},{}\n", e.n, e.mean_score));
        }
        out
    }
}

pub const DEFAULT_SWEEP_RANGE: RangeInclusive<usize> = 1..=15;

/// Mean K-NN test accuracy for every `N` in `n_range` over the protocol runs.
pub fn knn_sweep(ds: &LabeledDataset, n_range: RangeInclusive<usize>, protocol: &Protocol) -> Result<SweepResult> {
    protocol.validate()?;
    let (lo, hi) = (*n_range.start(), *n_range.end());
    if lo == 0 || lo > hi {
        return Err(Error::config(format!("invalid neighbour range {lo}..={hi}")));
    }
    let n_values: Vec<usize> = n_range.collect();
    let mut samples = vec![Vec::with_capacity(protocol.alpha); n_values.len()];
    for r in 0..protocol.alpha {
        let idx = split_indices(ds.labels(), &protocol.split_spec(r))?;
        if hi > idx.train.len() {
            return Err(Error::config(format!(
                "largest N ({hi}) exceeds the training partition ({} rows)",
                idx.train.len()
            )));
        }
        let train = ds.subset(&idx.train);
        let test = ds.subset(&idx.test);
        let model = KnnModel::train(&train, hi)?;
        let mut correct = vec![0usize; n_values.len()];
        for (x, &label) in test.rows().iter().zip(test.labels()) {
            let neighbors = model.neighbors(x, hi)?;
            for (k, &n) in n_values.iter().enumerate() {
                if model.vote(&neighbors[..n])?.argmax() == label {
                    correct[k] += 1;
                }
            }
        }
        for (k, c) in correct.into_iter().enumerate() {
            samples[k].push(c as f64 / test.len() as f64);
        }
    }
    let entries: Vec<SweepEntry> = n_values
        .into_iter()
        .zip(samples)
        .map(|(n, samples)| SweepEntry {
            n,
            mean_score: mean_and_std(&samples).0,
            samples,
        })
        .collect();
    let best_n = entries
        .iter()
        .fold(&entries[0], |best, e| if e.mean_score > best.mean_score { e } else { best })
        .n;
    Ok(SweepResult {
        alpha: protocol.alpha,
        seed: protocol.seed,
        entries,
        best_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn post(p: &[f64]) -> ClassPosterior {
        ClassPosterior::new(p.to_vec()).unwrap()
    }

    #[test]
    fn degenerate_weights_select_a_member() {
        let ps = [post(&[0.2, 0.8]), post(&[0.7, 0.3]), post(&[0.5, 0.5])];
        assert_eq!(weighted_vote(&ps, &[1.0, 0.0, 0.0]).unwrap(), ps[0]);
        assert_eq!(weighted_vote(&ps, &[0.0, 1.0, 0.0]).unwrap(), ps[1]);
    }

    #[test]
    fn identical_members_ignore_weights() {
        let p = post(&[0.1, 0.6, 0.3]);
        let ps = [p.clone(), p.clone(), p.clone()];
        let fused = weighted_vote(&ps, &[0.9, 0.2, 0.4]).unwrap();
        for (a, b) in fused.probabilities().iter().zip(p.probabilities()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn worked_weighted_mean() {
        let ps = [post(&[0.9, 0.1]), post(&[0.2, 0.8]), post(&[0.6, 0.4])];
        let fused = weighted_vote(&ps, &[0.5, 0.25, 0.25]).unwrap();
        assert!((fused.probability(0) - 0.65).abs() < 1e-12);
        assert_eq!(fused.argmax(), 0);
    }

    #[test]
    fn zero_weights_are_rejected() {
        let ps = [post(&[1.0]), post(&[1.0]), post(&[1.0])];
        assert!(matches!(weighted_vote(&ps, &[0.0, 0.0, 0.0]), Err(Error::Config(_))));
        assert!(matches!(weighted_vote(&ps, &[-1.0, 2.0, 0.0]), Err(Error::Config(_))));
    }

    #[test]
    fn member_names() {
        assert_eq!(Member::ALL.map(Member::name), ["knn", "naive_bayes", "random_forest"]);
        assert_eq!(serde_json::to_string(&Member::NaiveBayes).unwrap(), "\"naive_bayes\"");
    }

    #[test]
    fn alpha_zero_is_rejected() {
        let p = Protocol {
            alpha: 0,
            ..Protocol::default()
        };
        assert!(matches!(p.validate(), Err(Error::Config(_))));
    }
}
