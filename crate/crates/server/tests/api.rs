use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use axum::body::{to_bytes, Body};
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use medpredict_core::classifiers::RfParams;
use medpredict_core::dataset::load_csv;
use medpredict_core::ensemble::{compute_weights, MemberParams, Protocol};
use medpredict_core::model::ModelDocument;
use medpredict_core::recommender::RecommendationTable;
use medpredict_core::SplitSpec;
use medpredict_records::RecordStore;
use medpredict_server::{router, weight_percent, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

const PROBE_SYMPTOMS: [&str; 5] = ["swelled_lymph_nodes", "phlegm", "redness_of_eyes", "unsteadiness", "enlarged_thyroid"];

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn model() -> ModelDocument {
    static MODEL: OnceLock<ModelDocument> = OnceLock::new();
    MODEL
        .get_or_init(|| {
            let ds = load_csv(data_dir().join("symptom_survey.csv")).unwrap();
            let params = MemberParams {
                rf: RfParams {
                    n_trees: 20,
                    ..RfParams::default()
                },
                ..MemberParams::default()
            };
            let protocol = Protocol {
                alpha: 2,
                ..Protocol::default()
            };
            let report = compute_weights(&ds, &protocol, &params).unwrap();
            ModelDocument::fit(&ds, params, SplitSpec::default(), protocol, report).unwrap()
        })
        .clone()
}

fn state(model: Option<ModelDocument>, schemes: Option<PathBuf>) -> Arc<AppState> {
    Arc::new(AppState {
        model,
        recommendations: RecommendationTable::load(data_dir().join("recommendations.json")).unwrap(),
        records: Arc::new(RecordStore::in_memory()),
        schemes_path: schemes,
        cors_origin: None,
    })
}

fn app() -> Router {
    router(state(Some(model()), Some(data_dir().join("schemes.json"))))
}

async fn call(app: &Router, method: Method, uri: &str, token: Option<&str>, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(t) = token {
        req = req.header(header::AUTHORIZATION, format!("Bearer {t}"));
    }
    let req = match body {
        Some(b) => req.header(header::CONTENT_TYPE, "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = to_bytes(res.into_body(), usize::MAX).await.unwrap();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

fn assert_error_shape(v: &Value, code: &str) {
    let e = &v["error"];
    assert_eq!(e["code"], code, "{v}");
    assert!(e["message"].is_string());
    assert!(e.get("details").is_some());
}

#[tokio::test]
async fn health_reports_model() {
    let (s, v) = call(&app(), Method::GET, "/api/health", None, None).await;
    assert_eq!((s, v), (StatusCode::OK, json!({"status": "ok", "model_loaded": true})));
    let bare = router(state(None, None));
    let (_, v) = call(&bare, Method::GET, "/api/health", None, None).await;
    assert_eq!(v["model_loaded"], false);
}

#[tokio::test]
async fn predict_ranks_diseases_with_member_weights() {
    let app = app();
    let doc = model();
    let (s, v) = call(&app, Method::POST, "/api/predict", None, Some(json!({"symptoms": PROBE_SYMPTOMS}))).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    let preds = v["predictions"].as_array().unwrap();
    assert_eq!(preds.len(), 3);
    let probs: Vec<f64> = preds.iter().map(|p| p["probability"].as_f64().unwrap()).collect();
    assert!(probs.windows(2).all(|w| w[0] >= w[1]));
    for (name, w) in [("knn", 0), ("naive_bayes", 1), ("random_forest", 2)] {
        assert_eq!(v["per_classifier"][name]["weight"].as_f64().unwrap(), weight_percent(doc.model.weights()[w]));
        assert!(v["per_classifier"][name]["top_disease"].is_string());
    }
    assert_eq!(v["unknown_symptoms"], json!([]));
    assert_eq!(v["recommendation"]["diseases"].as_array().unwrap().len(), 3);
    assert_eq!(v["recommendation"]["diseases"][0]["disease"], preds[0]["disease"]);

    let (_, again) = call(&app, Method::POST, "/api/predict", None, Some(json!({"symptoms": PROBE_SYMPTOMS}))).await;
    assert_eq!(again.to_string(), v.to_string());
}

#[tokio::test]
async fn predict_reports_unknown_symptoms() {
    let app = app();
    let (s, v) = call(&app, Method::POST, "/api/predict", None, Some(json!({"symptoms": ["not_a_symptom"]}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error_shape(&v, "unrecognized_symptoms");
    assert_eq!(v["error"]["details"]["unknown_symptoms"], json!(["not_a_symptom"]));

    let (s, v) = call(&app, Method::POST, "/api/predict", None, Some(json!({"symptoms": []}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error_shape(&v, "no_symptoms");

    let (s, v) = call(&app, Method::POST, "/api/predict", None, Some(json!({"symptoms": ["Phlegm", "bogus thing"], "top_k": 1}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["unknown_symptoms"], json!(["bogus_thing"]));
    assert_eq!(v["predictions"].as_array().unwrap().len(), 1);

    let (s, _) = call(&app, Method::POST, "/api/predict", None, Some(json!({"symptoms": ["phlegm"], "top_k": 0}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let (s, v) = call(&app, Method::POST, "/api/predict", None, Some(json!({"nope": 1}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_error_shape(&v, "bad_request");
}

#[tokio::test]
async fn missing_model_is_unavailable() {
    let bare = router(state(None, None));
    for uri in ["/api/predict", "/api/quick-diagnosis"] {
        let (s, v) = call(&bare, Method::POST, uri, None, Some(json!({"symptoms": ["phlegm"]}))).await;
        assert_eq!(s, StatusCode::SERVICE_UNAVAILABLE);
        assert_error_shape(&v, "model_not_loaded");
    }
}

#[tokio::test]
async fn quick_diagnosis_returns_top_disease_and_otc() {
    let app = app();
    let (s, v) = call(&app, Method::POST, "/api/quick-diagnosis", None, Some(json!({"symptoms": PROBE_SYMPTOMS}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["predictions"].as_array().unwrap().len(), 1);
    assert_eq!(v["recommendation"]["tests"], json!([]));
    let top = v["predictions"][0]["disease"].as_str().unwrap();
    let table = RecommendationTable::load(data_dir().join("recommendations.json")).unwrap();
    assert_eq!(v["recommendation"]["otc"], json!(table.get(top).unwrap().otc));

    let (s, _) = call(&app, Method::POST, "/api/quick-diagnosis", None, Some(json!({"symptoms": ["xyz"]}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn quick_diagnosis_without_table_entry_is_unmatched() {
    let st = Arc::new(AppState {
        model: Some(model()),
        recommendations: RecommendationTable::default(),
        records: Arc::new(RecordStore::in_memory()),
        schemes_path: None,
        cors_origin: None,
    });
    let (s, v) = call(&router(st), Method::POST, "/api/quick-diagnosis", None, Some(json!({"symptoms": ["phlegm"]}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["recommendation"]["diseases"][0]["matched"], false);
    assert_eq!(v["recommendation"]["otc"], json!([]));
}

#[tokio::test]
async fn symptoms_endpoint_serves_vocabulary() {
    let (s, v) = call(&app(), Method::GET, "/api/symptoms", None, None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["symptoms"].as_array().unwrap().len(), model().model.vocabulary().len());
}

#[tokio::test]
async fn schemes_are_served_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("schemes.json");
    let app = router(state(None, Some(path.clone())));

    std::fs::write(&path, r#"[{"id":"a"},{"id":"b"}]"#).unwrap();
    let (s, v) = call(&app, Method::GET, "/api/schemes", None, None).await;
    assert_eq!((s, v.as_array().unwrap().len()), (StatusCode::OK, 2));

    std::fs::write(&path, "").unwrap();
    let (s, v) = call(&app, Method::GET, "/api/schemes", None, None).await;
    assert_eq!((s, v), (StatusCode::OK, json!([])));

    std::fs::remove_file(&path).unwrap();
    let (s, v) = call(&app, Method::GET, "/api/schemes", None, None).await;
    assert_eq!(s, StatusCode::SERVICE_UNAVAILABLE);
    assert_error_shape(&v, "schemes_unavailable");
}

#[tokio::test]
async fn unknown_routes_and_methods() {
    let app = app();
    let (s, v) = call(&app, Method::GET, "/nope", None, None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_error_shape(&v, "not_found");
    for m in [Method::PUT, Method::PATCH, Method::DELETE] {
        let (s, v) = call(&app, m, "/api/records/1", None, Some(json!({"diagnosis": "x"}))).await;
        assert_eq!(s, StatusCode::METHOD_NOT_ALLOWED);
        assert_error_shape(&v, "immutable");
    }
    let (s, v) = call(&app, Method::GET, "/api/predict", None, None).await;
    assert_eq!(s, StatusCode::METHOD_NOT_ALLOWED);
    assert_error_shape(&v, "method_not_allowed");
}

#[tokio::test]
async fn records_flow_with_auth() {
    let app = app();
    let reg = |u: &str, role: &str| json!({"username": u, "credential": "long-enough-1", "role": role});
    let (s, doc) = call(&app, Method::POST, "/api/register", None, Some(reg("dr_rao", "doctor"))).await;
    assert_eq!(s, StatusCode::CREATED);
    assert!(doc.get("credential_hash").is_none());
    call(&app, Method::POST, "/api/register", None, Some(reg("asha", "patient"))).await;
    call(&app, Method::POST, "/api/register", None, Some(reg("ben", "patient"))).await;
    let (s, v) = call(&app, Method::POST, "/api/register", None, Some(reg("asha", "patient"))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_error_shape(&v, "conflict");
    let (s, _) = call(&app, Method::POST, "/api/register", None, Some(json!({"username": "x", "credential": "abc", "role": "patient"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let login = |u: &str, c: &str| json!({"username": u, "credential": c});
    let (s, d) = call(&app, Method::POST, "/api/login", None, Some(login("dr_rao", "long-enough-1"))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!((d["role"].as_str(), d["username"].as_str()), (Some("doctor"), Some("dr_rao")));
    let doc_token = d["token"].as_str().unwrap().to_string();
    let (_, p) = call(&app, Method::POST, "/api/login", None, Some(login("asha", "long-enough-1"))).await;
    let asha = p["token"].as_str().unwrap().to_string();
    let (_, b) = call(&app, Method::POST, "/api/login", None, Some(login("ben", "long-enough-1"))).await;
    let ben = b["token"].as_str().unwrap().to_string();
    let (s1, e1) = call(&app, Method::POST, "/api/login", None, Some(login("asha", "wrong-credential"))).await;
    let (s2, e2) = call(&app, Method::POST, "/api/login", None, Some(login("ghost", "long-enough-1"))).await;
    assert_eq!((s1, s2), (StatusCode::UNAUTHORIZED, StatusCode::UNAUTHORIZED));
    assert_eq!(e1, e2);

    let rec = json!({"patient_id": 2, "symptoms": ["phlegm"], "diagnosis": "common_cold", "notes": ""});
    let (s, v) = call(&app, Method::POST, "/api/records", None, Some(rec.clone())).await;
    assert_eq!(s, StatusCode::UNAUTHORIZED);
    assert_error_shape(&v, "unauthorized");
    let (s, _) = call(&app, Method::POST, "/api/records", Some("deadbeef"), Some(rec.clone())).await;
    assert_eq!(s, StatusCode::UNAUTHORIZED);
    let (s, v) = call(&app, Method::POST, "/api/records", Some(&asha), Some(rec.clone())).await;
    assert_eq!(s, StatusCode::FORBIDDEN);
    assert_error_shape(&v, "forbidden");
    let (s, created) = call(&app, Method::POST, "/api/records", Some(&doc_token), Some(rec)).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(created["doctor_id"], 1);
    let (s, _) = call(&app, Method::POST, "/api/records", Some(&doc_token), Some(json!({"patient_id": 42, "diagnosis": "x"}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    let (s, h) = call(&app, Method::GET, "/api/patients/2/history", Some(&asha), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(h, json!([created]));
    let (s, _) = call(&app, Method::GET, "/api/patients/2/history", Some(&doc_token), None).await;
    assert_eq!(s, StatusCode::OK);
    let (s, _) = call(&app, Method::GET, "/api/patients/2/history", Some(&ben), None).await;
    assert_eq!(s, StatusCode::FORBIDDEN);
    let (s, _) = call(&app, Method::GET, "/api/patients/2/history", None, None).await;
    assert_eq!(s, StatusCode::UNAUTHORIZED);
    let (s, _) = call(&app, Method::GET, "/api/patients/abc/history", Some(&asha), None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn cors_preflight_is_answered() {
    let req = Request::builder()
        .method(Method::OPTIONS)
        .uri("/api/predict")
        .header(header::ORIGIN, "http://localhost:5173")
        .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
        .body(Body::empty())
        .unwrap();
    let res = app().oneshot(req).await.unwrap();
    assert_eq!(res.status(), StatusCode::OK);
    assert_eq!(res.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN], "*");
}
