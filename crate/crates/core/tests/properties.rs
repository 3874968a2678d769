mod common;

use medpredict_core::classifiers::{gini_impurity, KnnModel, NbModel, Node, RfModel, RfParams};
use medpredict_core::dataset::{binarize, encode_symptoms, parse_raw_csv, split_indices};
use medpredict_core::ensemble::weighted_vote;
use medpredict_core::evaluation::{accuracy, confusion_matrix, micro_precision, micro_recall, precision_recall};
use medpredict_core::{BinaryVector, ClassPosterior, Classifier, SplitSpec};
use proptest::prelude::*;

fn posterior(n_classes: usize) -> impl Strategy<Value = ClassPosterior> {
    prop::collection::vec(0.0f64..1.0, n_classes).prop_map(|raw| {
        let total: f64 = raw.iter().sum::<f64>() + 1e-3;
        let mut p: Vec<f64> = raw.iter().map(|v| (v + 1e-3 / raw.len() as f64) / total).collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= s);
        ClassPosterior::new(p).unwrap()
    })
}

fn triple() -> impl Strategy<Value = Vec<ClassPosterior>> {
    (2usize..6).prop_flat_map(|c| prop::collection::vec(posterior(c), 3))
}

fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 3).prop_filter("one positive weight", |w| w.iter().any(|&v| v > 1e-6))
}

fn labels_and_preds() -> impl Strategy<Value = (usize, Vec<usize>, Vec<usize>)> {
    (1usize..6, 1usize..60).prop_flat_map(|(c, n)| {
        (Just(c), prop::collection::vec(0..c, n), prop::collection::vec(0..c, n))
    })
}

fn small_dataset() -> impl Strategy<Value = (u64, usize, usize, usize)> {
    (any::<u64>(), 4usize..30, 1usize..12, 1usize..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ensemble_is_convex_and_scale_free(ps in triple(), w in weights(), k in 0.01f64..100.0) {
        let fused = weighted_vote(&ps, &w).unwrap();
        let scaled: Vec<f64> = w.iter().map(|v| v * k).collect();
        let rescaled = weighted_vote(&ps, &scaled).unwrap();
        for c in 0..fused.n_classes() {
            let lo = ps.iter().map(|p| p.probability(c)).fold(f64::INFINITY, f64::min);
            let hi = ps.iter().map(|p| p.probability(c)).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo - 1e-12 <= fused.probability(c) && fused.probability(c) <= hi + 1e-12);
            prop_assert!((fused.probability(c) - rescaled.probability(c)).abs() <= 1e-12);
        }
    }

    #[test]
    fn unanimous_members_decide_the_ensemble(ps in triple(), w in weights()) {
        let fused = weighted_vote(&ps, &w).unwrap();
        if ps.iter().all(|p| p.argmax() == ps[0].argmax()) {
            prop_assert_eq!(fused.argmax(), ps[0].argmax());
        }
    }

    #[test]
    fn metrics_stay_in_range_and_agree((c, t, p) in labels_and_preds()) {
        let m = confusion_matrix(&t, &p, c).unwrap();
        let r = precision_recall(&m).unwrap();
        prop_assert_eq!(m.total() as usize, t.len());
        for v in r.precision.iter().chain(&r.recall).chain([&r.accuracy, &r.macro_precision, &r.macro_recall]) {
            prop_assert!((0.0..=1.0).contains(v));
        }
        for k in 0..c {
            let want = if m.support(k) == 0 { 0.0 } else { m.counts[k][k] as f64 / m.support(k) as f64 };
            prop_assert_eq!(r.recall[k], want);
        }
        let diagonal = (0..c).all(|i| (0..c).all(|j| i == j || m.counts[i][j] == 0));
        prop_assert_eq!(accuracy(&m).unwrap() == 1.0, diagonal);
        prop_assert!((micro_precision(&m) - r.accuracy).abs() < 1e-12);
        prop_assert!((micro_recall(&m) - r.accuracy).abs() < 1e-12);
    }

    #[test]
    fn metrics_ignore_class_relabelling((c, t, p) in labels_and_preds(), shift in 0usize..6) {
        let perm = |l: usize| (l + shift) % c;
        let a = precision_recall(&confusion_matrix(&t, &p, c).unwrap()).unwrap();
        let tp: Vec<usize> = t.iter().map(|&l| perm(l)).collect();
        let pp: Vec<usize> = p.iter().map(|&l| perm(l)).collect();
        let b = precision_recall(&confusion_matrix(&tp, &pp, c).unwrap()).unwrap();
        prop_assert_eq!(a.accuracy, b.accuracy);
        prop_assert!((a.macro_precision - b.macro_precision).abs() < 1e-12);
        prop_assert!((a.macro_recall - b.macro_recall).abs() < 1e-12);
        for k in 0..c {
            prop_assert_eq!(a.precision[k], b.precision[perm(k)]);
        }
    }

    #[test]
    fn gini_is_zero_for_one_class_and_order_free(n in 1usize..1000, mut counts in prop::collection::vec(0usize..50, 1..8)) {
        prop_assert_eq!(gini_impurity(&[n]).unwrap(), 0.0);
        if counts.iter().sum::<usize>() > 0 {
            let g = gini_impurity(&counts).unwrap();
            counts.reverse();
            prop_assert!((g - gini_impurity(&counts).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn splits_partition_exactly(labels in prop::collection::vec(0usize..5, 2..200), seed in any::<u64>(), stratified in any::<bool>()) {
        let spec = SplitSpec { test_fraction: 0.2, seed, stratified };
        if let Ok(idx) = split_indices(&labels, &spec) {
            prop_assert_eq!(idx.train.len() + idx.test.len(), labels.len());
            prop_assert_eq!(idx.test.len(), labels.len() / 5);
            let mut all: Vec<usize> = idx.train.iter().chain(&idx.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn every_prediction_is_a_distribution((seed, n, d, c) in small_dataset(), q in any::<u64>()) {
        let ds = common::random_dataset(seed, n, d, c);
        let x = BinaryVector::from_indices(d, (0..d).filter(|j| q >> (j % 64) & 1 == 1)).unwrap();
        let rf = RfModel::train(&ds, &RfParams { n_trees: 5, seed, ..RfParams::default() }).unwrap();
        let models: [Box<dyn Classifier>; 3] = [
            Box::new(KnnModel::train(&ds, 1 + (seed as usize % n)).unwrap()),
            Box::new(NbModel::train(&ds, 1.0).unwrap()),
            Box::new(rf),
        ];
        for m in &models {
            let p = m.predict(&x).unwrap();
            prop_assert!(p.probabilities().iter().all(|&v| v >= 0.0));
            prop_assert!((p.probabilities().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn naive_bayes_likelihoods_are_complementary((seed, n, d, c) in small_dataset(), s in 0.1f64..3.0) {
        let ds = common::random_dataset(seed, n, d, c);
        let nb = NbModel::train(&ds, s).unwrap();
        for k in 0..c {
            for j in 0..d {
                let total = nb.log_likelihood_on(k, j).exp() + nb.log_likelihood_off(k, j).exp();
                prop_assert!((total - 1.0).abs() <= 1e-9);
            }
        }
        prop_assert!((nb.log_priors().iter().map(|p| p.exp()).sum::<f64>() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn forests_are_reproducible_and_paths_never_repeat_features((seed, n, d, c) in small_dataset()) {
        let ds = common::random_dataset(seed, n, d, c);
        let params = RfParams { n_trees: 4, seed, ..RfParams::default() };
        let a = RfModel::train(&ds, &params).unwrap();
        prop_assert_eq!(&a, &RfModel::train(&ds, &params).unwrap());
        for tree in a.trees() {
            let mut stack = vec![(0usize, Vec::<usize>::new())];
            while let Some((i, path)) = stack.pop() {
                match &tree.nodes()[i] {
                    Node::Leaf { counts } => prop_assert!(!counts.is_empty()),
                    Node::Split { feature, absent, present } => {
                        prop_assert!(!path.contains(feature));
                        let mut next = path.clone();
                        next.push(*feature);
                        stack.push((*absent, next.clone()));
                        stack.push((*present, next));
                    }
                }
            }
        }
    }

    #[test]
    fn encode_then_decode_returns_recognized_subset(known in prop::collection::btree_set(0usize..12, 1..6), extra in prop::collection::vec("[a-z]{3}", 0..3)) {
        let vocab = common::vocab(12);
        let mut names: Vec<String> = known.iter().map(|&j| format!("s{j:03}")).collect();
        names.extend(extra.iter().map(|e| format!("zz_{e}")));
        let (x, unknown) = encode_symptoms(&names, &vocab).unwrap();
        let want: Vec<String> = known.iter().map(|&j| format!("s{j:03}")).collect();
        prop_assert_eq!(vocab.decode(&x), want);
        prop_assert!(unknown.iter().all(|u| u.starts_with("zz_")));
    }

    #[test]
    fn binarize_is_deterministic_and_shaped(rows in prop::collection::vec((0usize..4, prop::collection::btree_set(0usize..9, 1..5)), 1..30)) {
        let mut csv = String::from("disease,symptom_1,symptom_2,symptom_3,symptom_4\n");
        for (d, s) in &rows {
            let mut cells: Vec<String> = s.iter().map(|j| format!("sym {j}")).collect();
            cells.resize(4, String::new());
            csv.push_str(&format!("Disease {d},{}\n", cells.join(",")));
        }
        let a = binarize(&parse_raw_csv(&csv).unwrap()).unwrap();
        let b = binarize(&parse_raw_csv(&csv).unwrap()).unwrap();
        prop_assert_eq!(&a, &b);
        for (row, (_, s)) in a.rows().iter().zip(&rows) {
            prop_assert_eq!(row.len(), a.vocabulary().len());
            prop_assert_eq!(row.count_ones(), s.len());
        }
    }
}
