//! Versioned JSON document holding a trained ensemble.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{split, LabeledDataset, SplitSpec};
use crate::ensemble::{EnsembleModel, MemberParams, Members, Protocol, WeightReport};
use crate::error::{Error, Result};

pub const FORMAT: &str = "medpredict-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Ensemble,
}

/// A trained ensemble plus the settings it was produced with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    pub kind: ModelKind,
    pub hyperparameters: MemberParams,
    /// Partition whose training side the members were fitted on.
    pub split: SplitSpec,
    pub protocol: Protocol,
    pub weight_report: WeightReport,
    pub model: EnsembleModel,
}

impl ModelDocument {
    pub fn new(
        model: EnsembleModel,
        hyperparameters: MemberParams,
        split: SplitSpec,
        protocol: Protocol,
        weight_report: WeightReport,
    ) -> Self {
        ModelDocument {
            format: FORMAT.to_string(),
            version: FORMAT_VERSION,
            kind: ModelKind::Ensemble,
            hyperparameters,
            split,
            protocol,
            weight_report,
            model,
        }
    }

    /// Trains the members on the training side of `split_spec` and weights
    /// them with the report's mean accuracies.
    pub fn fit(
        ds: &LabeledDataset,
        hyperparameters: MemberParams,
        split_spec: SplitSpec,
        protocol: Protocol,
        weight_report: WeightReport,
    ) -> Result<Self> {
        let (train, _) = split(ds, &split_spec)?;
        let members = Members::train(&train, &hyperparameters)?;
        let model = EnsembleModel::new(
            ds.vocabulary().clone(),
            ds.class_names().to_vec(),
            members,
            weight_report.weights(),
        )?;
        Ok(ModelDocument::new(model, hyperparameters, split_spec, protocol, weight_report))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Header {
            format: String,
            version: u32,
        }
        let header: Header = serde_json::from_str(text)?;
        if header.format != FORMAT {
            return Err(Error::value(format!("not a model document (format `{}`)", header.format)));
        }
        if header.version != FORMAT_VERSION {
            return Err(Error::value(format!(
                "unsupported model version {} (expected {FORMAT_VERSION})",
                header.version
            )));
        }
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        ModelDocument::from_json(&std::fs::read_to_string(path)?)
    }
}
