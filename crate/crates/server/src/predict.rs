use std::collections::BTreeMap;

use axum::http::StatusCode;
use medpredict_core::dataset::encode_symptoms;
use medpredict_core::recommender::{Recommendation, RecommendationTable};
use medpredict_core::{EnsembleModel, Error, Member};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::ApiError;

pub const DEFAULT_TOP_K: usize = 3;

fn default_top_k() -> usize {
    DEFAULT_TOP_K
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictRequest {
    pub symptoms: Vec<String>,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedDisease {
    pub disease: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberSummary {
    /// Ensemble weight as a percentage, rounded to 2 decimals.
    pub weight: f64,
    pub top_disease: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictResponse {
    pub predictions: Vec<RankedDisease>,
    pub per_classifier: BTreeMap<String, MemberSummary>,
    pub unknown_symptoms: Vec<String>,
    pub recommendation: Recommendation,
}

pub fn weight_percent(weight: f64) -> f64 {
    (weight * 10_000.0).round() / 100.0
}

/// Ranks diseases for `request`. `quick` keeps only the top disease and its
/// OTC medicines.
pub fn predict(
    model: &EnsembleModel,
    table: &RecommendationTable,
    request: &PredictRequest,
    quick: bool,
) -> Result<PredictResponse, ApiError> {
    if request.top_k == 0 {
        return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "validation", "top_k must be at least 1"));
    }
    if request.symptoms.is_empty() {
        return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "no_symptoms", "at least one symptom is required")
            .with_details(json!({"unknown_symptoms": []})));
    }
    let (x, unknown_symptoms) = match encode_symptoms(&request.symptoms, model.vocabulary()) {
        Ok(encoded) => encoded,
        Err(Error::Encode { unknown }) => {
            return Err(ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "unrecognized_symptoms",
                "none of the symptoms are known",
            )
            .with_details(json!({ "unknown_symptoms": unknown })))
        }
        Err(e) => return Err(ApiError::internal(e.to_string())),
    };
    let (members, fused) = model.predict_detailed(&x).map_err(|e| ApiError::internal(e.to_string()))?;
    let names = model.class_names();
    let k = if quick { 1 } else { request.top_k };
    let predictions: Vec<RankedDisease> = fused
        .top_k(k)
        .into_iter()
        .map(|(c, p)| RankedDisease {
            disease: names[c].clone(),
            probability: p,
        })
        .collect();
    let per_classifier = Member::ALL
        .iter()
        .map(|&m| {
            let p = &members[m.index()];
            let summary = MemberSummary {
                weight: weight_percent(model.weight(m)),
                top_disease: names[p.argmax()].clone(),
                confidence: p.confidence(),
            };
            (m.name().to_string(), summary)
        })
        .collect();
    let ranked: Vec<&str> = predictions.iter().map(|r| r.disease.as_str()).collect();
    let mut recommendation = table.recommend(&ranked);
    if quick {
        recommendation = recommendation.otc_only();
    }
    Ok(PredictResponse {
        predictions,
        per_classifier,
        unknown_symptoms,
        recommendation,
    })
}
