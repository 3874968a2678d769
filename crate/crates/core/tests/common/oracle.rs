//! Independent reference implementations the classifiers are checked against.

use medpredict_core::{BinaryVector, LabeledDataset};

/// Bernoulli naive Bayes evaluated as a plain product of probabilities.
pub fn nb_direct(ds: &LabeledDataset, s: f64, x: &[u8]) -> Vec<f64> {
    let n = ds.len() as f64;
    let joint: Vec<f64> = (0..ds.n_classes())
        .map(|c| {
            let members: Vec<&BinaryVector> =
                ds.rows().iter().zip(ds.labels()).filter(|(_, &l)| l == c).map(|(r, _)| r).collect();
            let nc = members.len() as f64;
            let mut p = nc / n;
            for (j, &xj) in x.iter().enumerate() {
                let on = members.iter().filter(|r| r.get(j)).count() as f64;
                let p_on = (on + s) / (nc + 2.0 * s);
                p *= if xj == 1 { p_on } else { 1.0 - p_on };
            }
            p
        })
        .collect();
    let total: f64 = joint.iter().sum();
    joint.iter().map(|p| p / total).collect()
}

/// K-NN by sorting every training row on (distance, row index).
pub fn knn_sorted(ds: &LabeledDataset, k: usize, x: &BinaryVector) -> Vec<f64> {
    let mut order: Vec<(f64, usize)> = ds
        .rows()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let sq: f64 = (0..x.len()).map(|j| (f64::from(u8::from(x.get(j))) - f64::from(u8::from(r.get(j)))).powi(2)).sum();
            (sq.sqrt(), i)
        })
        .collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut p = vec![0.0; ds.n_classes()];
    for &(_, i) in &order[..k] {
        p[ds.labels()[i]] += 1.0 / k as f64;
    }
    p
}

pub enum Cart {
    Leaf(Vec<f64>),
    Split(usize, Box<Cart>, Box<Cart>),
}

fn gini(labels: &[usize], n_classes: usize) -> f64 {
    let n = labels.len() as f64;
    1.0 - (0..n_classes)
        .map(|c| (labels.iter().filter(|&&l| l == c).count() as f64 / n).powi(2))
        .sum::<f64>()
}

/// Textbook recursive CART: try every feature, keep the lowest weighted
/// child impurity (near-equal scores count as ties, won by the smaller
/// feature), stop on pure nodes or when no feature separates the rows.
pub fn cart(ds: &LabeledDataset, rows: &[usize]) -> Cart {
    let c = ds.n_classes();
    let labels: Vec<usize> = rows.iter().map(|&i| ds.labels()[i]).collect();
    let leaf = || {
        let mut p = vec![0.0; c];
        for &l in &labels {
            p[l] += 1.0 / labels.len() as f64;
        }
        Cart::Leaf(p)
    };
    if labels.iter().all(|&l| l == labels[0]) || rows.len() < 2 {
        return leaf();
    }
    let mut best: Option<(usize, f64)> = None;
    for f in 0..ds.n_features() {
        let (on, off): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| ds.rows()[i].get(f));
        if on.is_empty() || off.is_empty() {
            continue;
        }
        let lab = |v: &[usize]| v.iter().map(|&i| ds.labels()[i]).collect::<Vec<_>>();
        let n = rows.len() as f64;
        let score = on.len() as f64 / n * gini(&lab(&on), c) + off.len() as f64 / n * gini(&lab(&off), c);
        if best.is_none_or(|(_, b)| score < b - 1e-12) {
            best = Some((f, score));
        }
    }
    match best {
        None => leaf(),
        Some((f, _)) => {
            let (on, off): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| ds.rows()[i].get(f));
            Cart::Split(f, Box::new(cart(ds, &off)), Box::new(cart(ds, &on)))
        }
    }
}

pub fn cart_predict(tree: &Cart, x: &BinaryVector) -> Vec<f64> {
    match tree {
        Cart::Leaf(p) => p.clone(),
        Cart::Split(f, off, on) => cart_predict(if x.get(*f) { on } else { off }, x),
    }
}
