//! Raw symptom/disease tables, the symptom vocabulary and binarized datasets.
//!
//! The raw format is a CSV whose first column is `disease` followed by
//! `symptom_1 .. symptom_k` columns; shorter rows and empty cells are allowed.
//! Every symptom and disease name goes through [`normalize_name`] so that
//! lookups from user input, recommendation tables and the dataset agree.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::bits::BinaryVector;
use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

/// Trim, lowercase and collapse internal whitespace runs into `_`.
pub fn normalize_name(raw: &str) -> String {
    raw.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join("_")
}

/// Sorted, de-duplicated list of symptom identifiers. A symptom's index is its
/// column in every feature vector built against this vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct SymptomVocabulary {
    symptoms: Vec<String>,
}

impl SymptomVocabulary {
    /// Builds a vocabulary from arbitrary names. Names are normalized, sorted
    /// and de-duplicated; the result must be non-empty.
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let set: BTreeSet<String> = names
            .into_iter()
            .map(|s| normalize_name(s.as_ref()))
            .filter(|s| !s.is_empty())
            .collect();
        if set.is_empty() {
            return Err(Error::value("symptom vocabulary is empty"));
        }
        Ok(SymptomVocabulary {
            symptoms: set.into_iter().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.symptoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symptoms.is_empty()
    }

    pub fn symptoms(&self) -> &[String] {
        &self.symptoms
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        self.symptoms.get(index).map(String::as_str)
    }

    /// Column of an already-normalized symptom name.
    pub fn index_of(&self, normalized: &str) -> Option<usize> {
        self.symptoms
            .binary_search_by(|s| s.as_str().cmp(normalized))
            .ok()
    }

    /// Names of the set columns of `vector`, in vocabulary order.
    pub fn decode(&self, vector: &BinaryVector) -> Vec<String> {
        vector.ones().map(|j| self.symptoms[j].clone()).collect()
    }
}

impl TryFrom<Vec<String>> for SymptomVocabulary {
    type Error = Error;

    fn try_from(symptoms: Vec<String>) -> Result<Self> {
        let vocab = SymptomVocabulary::new(&symptoms)?;
        if vocab.symptoms != symptoms {
            return Err(Error::value(
                "serialized vocabulary must be sorted, unique and normalized",
            ));
        }
        Ok(vocab)
    }
}

impl From<SymptomVocabulary> for Vec<String> {
    fn from(v: SymptomVocabulary) -> Self {
        v.symptoms
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    pub disease: String,
    pub symptoms: Vec<String>,
}

/// Parsed survey rows before binarization.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawDataset {
    pub records: Vec<RawRecord>,
}

impl RawDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

fn check_header(headers: &csv::StringRecord) -> Result<()> {
    let mut cells = headers.iter().map(|h| h.trim().to_lowercase());
    match cells.next() {
        Some(first) if first == "disease" => {}
        _ => return Err(Error::parse(None, "first header must be `disease`")),
    }
    for (i, cell) in cells.enumerate() {
        let expected = format!("symptom_{}", i + 1);
        if cell != expected {
            return Err(Error::parse(
                None,
                format!("header column {} must be `{expected}`, found `{cell}`", i + 2),
            ));
        }
    }
    Ok(())
}

/// Parses the raw `disease,symptom_1,..,symptom_k` CSV.
pub fn parse_raw_csv(text: &str) -> Result<RawDataset> {
    if text.trim().is_empty() {
        return Err(Error::parse(None, "empty input"));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(None, e.to_string()))?
        .clone();
    check_header(&headers)?;

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| Error::parse(row_no, e.to_string()))?;
        if row.len() > headers.len() {
            return Err(Error::parse(
                row_no,
                format!("{} cells but only {} headers", row.len(), headers.len()),
            ));
        }
        let disease = normalize_name(row.get(0).unwrap_or_default());
        if disease.is_empty() {
            return Err(Error::parse(row_no, "empty disease name"));
        }
        let symptoms: Vec<String> = row
            .iter()
            .skip(1)
            .map(normalize_name)
            .filter(|s| !s.is_empty())
            .collect();
        if symptoms.is_empty() {
            return Err(Error::parse(row_no, "record has no symptoms"));
        }
        records.push(RawRecord { disease, symptoms });
    }
    Ok(RawDataset { records })
}

/// Binary symptom matrix with one disease label per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDataset {
    vocabulary: SymptomVocabulary,
    class_names: Vec<String>,
    rows: Vec<BinaryVector>,
    labels: Vec<usize>,
}

impl LabeledDataset {
    /// Assembles a dataset from parts, validating every invariant.
    pub fn new(
        vocabulary: SymptomVocabulary,
        class_names: Vec<String>,
        rows: Vec<BinaryVector>,
        labels: Vec<usize>,
    ) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::value(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if class_names.is_empty() {
            return Err(Error::value("no class names"));
        }
        if class_names.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::value("class names must be sorted and unique"));
        }
        for (i, (row, &label)) in rows.iter().zip(&labels).enumerate() {
            Error::check_dim(vocabulary.len(), row.len())?;
            if label >= class_names.len() {
                return Err(Error::value(format!("row {i}: label {label} out of range")));
            }
            if row.count_ones() == 0 {
                return Err(Error::value(format!("row {i} has no symptoms")));
            }
        }
        Ok(LabeledDataset {
            vocabulary,
            class_names,
            rows,
            labels,
        })
    }

    pub fn vocabulary(&self) -> &SymptomVocabulary {
        &self.vocabulary
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn n_features(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[BinaryVector] {
        &self.rows
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.class_names
            .binary_search_by(|c| c.as_str().cmp(name))
            .ok()
    }

    /// Number of rows per class, indexed by class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows at `indices` (in the given order), sharing vocabulary and classes.
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            vocabulary: self.vocabulary.clone(),
            class_names: self.class_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Marks, for every record, a 1 in the column of each symptom it lists.
pub fn binarize(raw: &RawDataset) -> Result<LabeledDataset> {
    if raw.is_empty() {
        return Err(Error::value("cannot binarize an empty dataset"));
    }
    let vocabulary = SymptomVocabulary::new(raw.records.iter().flat_map(|r| r.symptoms.iter()))?;
    let class_names: Vec<String> = raw
        .records
        .iter()
        .map(|r| r.disease.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let class_index: BTreeMap<&str, usize> = class_names
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();

    let mut rows = Vec::with_capacity(raw.len());
    let mut labels = Vec::with_capacity(raw.len());
    for record in &raw.records {
        let mut row = BinaryVector::zeros(vocabulary.len());
        for s in &record.symptoms {
            // every symptom is in the vocabulary by construction
            let j = vocabulary.index_of(&normalize_name(s)).expect("symptom in vocabulary");
            row.set(j);
        }
        rows.push(row);
        labels.push(class_index[normalize_name(&record.disease).as_str()]);
    }
    LabeledDataset::new(vocabulary, class_names, rows, labels)
}

/// Reads and binarizes a raw CSV file.
pub fn load_csv(path: impl AsRef<std::path::Path>) -> Result<LabeledDataset> {
    let text = std::fs::read_to_string(path)?;
    binarize(&parse_raw_csv(&text)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            test_fraction: 0.2,
            seed: 0,
            stratified: true,
        }
    }
}

impl SplitSpec {
    pub fn with_seed(seed: u64) -> Self {
        SplitSpec {
            seed,
            ..SplitSpec::default()
        }
    }
}

/// Row indices of a train/test partition, each in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Partitions row indices given the label of each row.
///
/// The test side receives exactly `floor(test_fraction * n)` rows. In
/// stratified mode each class contributes `floor(test_fraction * n_c)` rows
/// and the remaining slots go to the classes with the largest fractional
/// remainders (smaller class index first on ties), preferring classes that
/// keep at least one training row.
pub fn split_indices(labels: &[usize], spec: &SplitSpec) -> Result<SplitIndices> {
    let f = spec.test_fraction;
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::config(format!("test_fraction {f} outside (0, 1)")));
    }
    let n = labels.len();
    if n < 2 {
        return Err(Error::config("split needs at least 2 rows"));
    }
    let n_test = (f * n as f64).floor() as usize;
    if n_test == 0 || n_test == n {
        return Err(Error::config(format!(
            "test_fraction {f} leaves an empty partition for {n} rows"
        )));
    }

    let mut rng = rng_from_seed(spec.seed);
    let mut test = Vec::with_capacity(n_test);
    if spec.stratified {
        let n_classes = labels.iter().max().map_or(0, |&m| m + 1);
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
        for (i, &l) in labels.iter().enumerate() {
            by_class[l].push(i);
        }
        let mut quotas = Vec::with_capacity(n_classes);
        let mut remainders = Vec::with_capacity(n_classes);
        for rows in &by_class {
            let exact = f * rows.len() as f64;
            quotas.push(exact.floor() as usize);
            remainders.push(exact - exact.floor());
        }
        let deficit = n_test - quotas.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..n_classes)
            .filter(|&c| quotas[c] < by_class[c].len())
            .collect();
        order.sort_by(|&a, &b| {
            let empties = |c: usize| quotas[c] + 1 >= by_class[c].len();
            empties(a)
                .cmp(&empties(b))
                .then(remainders[b].total_cmp(&remainders[a]))
                .then(a.cmp(&b))
        });
        for &c in order.iter().take(deficit) {
            quotas[c] += 1;
        }
        for (rows, quota) in by_class.iter_mut().zip(quotas) {
            rows.shuffle(&mut rng);
            test.extend_from_slice(&rows[..quota]);
        }
    } else {
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng);
        test.extend_from_slice(&all[..n_test]);
    }
    debug_assert_eq!(test.len(), n_test);

    let mut in_test = vec![false; n];
    for &i in &test {
        in_test[i] = true;
    }
    test.sort_unstable();
    let train = (0..n).filter(|&i| !in_test[i]).collect();
    Ok(SplitIndices { train, test })
}

/// Splits `ds` into `(train, test)` following [`split_indices`].
pub fn split(ds: &LabeledDataset, spec: &SplitSpec) -> Result<(LabeledDataset, LabeledDataset)> {
    let idx = split_indices(ds.labels(), spec)?;
    Ok((ds.subset(&idx.train), ds.subset(&idx.test)))
}

/// Maps free-form symptom names onto `vocab`.
///
/// Returns the feature vector and the normalized names that are not in the
/// vocabulary (first occurrence order, de-duplicated). Fails when nothing is
/// recognized.
pub fn encode_symptoms<S: AsRef<str>>(
    names: &[S],
    vocab: &SymptomVocabulary,
) -> Result<(BinaryVector, Vec<String>)> {
    let mut vector = BinaryVector::zeros(vocab.len());
    let mut unknown: Vec<String> = Vec::new();
    for name in names {
        let normalized = normalize_name(name.as_ref());
        match vocab.index_of(&normalized) {
            Some(j) => vector.set(j),
            None => {
                if !unknown.contains(&normalized) {
                    unknown.push(normalized);
                }
            }
        }
    }
    if vector.count_ones() == 0 {
        return Err(Error::Encode { unknown });
    }
    Ok((vector, unknown))
}
