//! Disease-keyed lookup of recommended tests and over-the-counter medicines.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dataset::normalize_name;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    pub tests: Vec<String>,
    pub otc: Vec<String>,
}

/// Normalized disease name to its recommendations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecommendationTable {
    entries: BTreeMap<String, TableEntry>,
}

fn string_list(disease: &str, field: &str, value: Option<&Value>) -> Result<Vec<String>> {
    match value {
        None => Ok(Vec::new()),
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| {
                v.as_str().map(str::to_string).ok_or_else(|| {
                    Error::config(format!("`{disease}.{field}` must contain only strings"))
                })
            })
            .collect(),
        Some(_) => Err(Error::config(format!("`{disease}.{field}` must be a list"))),
    }
}

impl RecommendationTable {
    /// Parses `{"disease": {"tests": [..], "otc": [..]}, ..}`. Missing lists
    /// are empty; other fields are ignored, as are top-level keys starting
    /// with `_`.
    pub fn from_json(document: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(document).map_err(|e| Error::config(format!("recommendation table: {e}")))?;
        let Value::Object(map) = value else {
            return Err(Error::config("recommendation table must be a JSON object"));
        };
        let mut entries = BTreeMap::new();
        for (disease, entry) in map {
            if disease.starts_with('_') {
                continue;
            }
            let Value::Object(fields) = entry else {
                return Err(Error::config(format!("entry `{disease}` must be an object")));
            };
            let tests = string_list(&disease, "tests", fields.get("tests"))?;
            let otc = string_list(&disease, "otc", fields.get("otc"))?;
            entries.insert(normalize_name(&disease), TableEntry { tests, otc });
        }
        Ok(RecommendationTable { entries })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        RecommendationTable::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, disease: &str) -> Option<&TableEntry> {
        self.entries.get(&normalize_name(disease))
    }

    /// Per-disease lookups for `ranked_diseases` (most probable first) plus
    /// the de-duplicated union of their lists in rank order.
    pub fn recommend<S: AsRef<str>>(&self, ranked_diseases: &[S]) -> Recommendation {
        let mut rec = Recommendation::default();
        for disease in ranked_diseases {
            let disease = disease.as_ref();
            let entry = self.get(disease);
            let item = DiseaseRecommendation {
                disease: disease.to_string(),
                matched: entry.is_some(),
                tests: entry.map(|e| e.tests.clone()).unwrap_or_default(),
                otc: entry.map(|e| e.otc.clone()).unwrap_or_default(),
            };
            merge_into(&mut rec.tests, &item.tests);
            merge_into(&mut rec.otc, &item.otc);
            rec.diseases.push(item);
        }
        rec
    }
}

fn merge_into(merged: &mut Vec<String>, items: &[String]) {
    for item in items {
        if !merged.contains(item) {
            merged.push(item.clone());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiseaseRecommendation {
    pub disease: String,
    pub matched: bool,
    pub tests: Vec<String>,
    pub otc: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recommendation {
    pub diseases: Vec<DiseaseRecommendation>,
    /// Union of all tests, first occurrence order.
    pub tests: Vec<String>,
    /// Union of all OTC medicines, first occurrence order.
    pub otc: Vec<String>,
}

impl Recommendation {
    /// Same recommendation with every test list emptied.
    pub fn otc_only(mut self) -> Self {
        self.tests.clear();
        for d in &mut self.diseases {
            d.tests.clear();
        }
        self
    }
}
