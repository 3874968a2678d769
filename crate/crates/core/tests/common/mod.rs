#![allow(dead_code)]

pub mod oracle;

use medpredict_core::{BinaryVector, LabeledDataset, SymptomVocabulary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn vocab(d: usize) -> SymptomVocabulary {
    SymptomVocabulary::new((0..d).map(|j| format!("s{j:03}"))).unwrap()
}

pub fn classes(c: usize) -> Vec<String> {
    (0..c).map(|i| format!("c{i:03}")).collect()
}

pub fn dataset(bits: &[Vec<u8>], labels: &[usize], n_classes: usize) -> LabeledDataset {
    LabeledDataset::new(
        vocab(bits[0].len()),
        classes(n_classes),
        bits.iter().map(|b| BinaryVector::from_bits(b).unwrap()).collect(),
        labels.to_vec(),
    )
    .unwrap()
}

/// Random row with at least one bit set.
pub fn random_bits(rng: &mut ChaCha8Rng, d: usize, density: f64) -> Vec<u8> {
    let mut b: Vec<u8> = (0..d).map(|_| u8::from(rng.random_bool(density))).collect();
    if b.iter().all(|&v| v == 0) {
        b[rng.random_range(0..d)] = 1;
    }
    b
}

pub fn random_dataset(seed: u64, n: usize, d: usize, c: usize) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let density = rng.random_range(0.15..0.6);
    let bits: Vec<Vec<u8>> = (0..n).map(|_| random_bits(&mut rng, d, density)).collect();
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
    dataset(&bits, &labels, c)
}

pub fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
    }
}
