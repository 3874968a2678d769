//! HTTP JSON API: anonymous prediction and quick diagnosis, account
//! registration and login, doctor-written append-only medical records,
//! patient history and a static schemes listing.

mod error;
mod predict;

use std::future::Future;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{FromRequest, FromRequestParts, Path, Request, State};
use axum::http::header::{AUTHORIZATION, CONTENT_TYPE};
use axum::http::request::Parts;
use axum::http::{HeaderValue, Method, StatusCode};
use axum::response::IntoResponse;
use axum::routing::{any, get, post};
use axum::{Json, Router};
use medpredict_core::model::ModelDocument;
use medpredict_core::recommender::RecommendationTable;
use medpredict_records::{MedicalRecord, NewRecord, RecordStore, RecordsError, Role, Session};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::net::TcpListener;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub use error::ApiError;
pub use predict::{predict, weight_percent, MemberSummary, PredictRequest, PredictResponse, RankedDisease, DEFAULT_TOP_K};

/// Everything the handlers share. The model and table never change after
/// construction.
pub struct AppState {
    pub model: Option<ModelDocument>,
    pub recommendations: RecommendationTable,
    pub records: Arc<RecordStore>,
    pub schemes_path: Option<PathBuf>,
    /// Allowed browser origin; any origin when unset.
    pub cors_origin: Option<String>,
}

type Shared = Arc<AppState>;

/// JSON body whose rejections use the uniform error shape.
struct Body<T>(T);

impl<S, T> FromRequest<S> for Body<T>
where
    Json<T>: FromRequest<S, Rejection = axum::extract::rejection::JsonRejection>,
    S: Send + Sync,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        Ok(Body(Json::<T>::from_request(req, state).await?.0))
    }
}

/// The caller's live session, from an `Authorization: Bearer` header.
struct Authed(Session);

impl FromRequestParts<Shared> for Authed {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &Shared) -> Result<Self, Self::Rejection> {
        let token = parts
            .headers
            .get(AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(str::trim)
            .ok_or_else(ApiError::unauthorized)?;
        state.records.authenticate(token).map(Authed).map_err(|_| ApiError::unauthorized())
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, RecordsError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(ApiError::from)
}

pub fn router(state: Shared) -> Router {
    let cors = CorsLayer::new()
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([CONTENT_TYPE, AUTHORIZATION])
        .allow_origin(match &state.cors_origin {
            Some(origin) => match HeaderValue::from_str(origin) {
                Ok(v) => AllowOrigin::exact(v),
                Err(_) => AllowOrigin::any(),
            },
            None => AllowOrigin::any(),
        });
    Router::new()
        .route("/api/health", get(health))
        .route("/api/symptoms", get(symptoms))
        .route("/api/register", post(register))
        .route("/api/login", post(login))
        .route("/api/predict", post(predict_handler))
        .route("/api/quick-diagnosis", post(quick_diagnosis))
        .route("/api/records", post(create_record))
        .route("/api/records/{*rest}", any(immutable))
        .route("/api/patients/{id}/history", get(history))
        .route("/api/schemes", get(schemes))
        .fallback(|| async { ApiError::not_found() })
        .method_not_allowed_fallback(|| async { ApiError::method_not_allowed() })
        .layer(cors)
        .with_state(state)
}

async fn health(State(state): State<Shared>) -> Json<Value> {
    Json(json!({"status": "ok", "model_loaded": state.model.is_some()}))
}

async fn symptoms(State(state): State<Shared>) -> Result<Json<Value>, ApiError> {
    let doc = state.model.as_ref().ok_or_else(ApiError::model_not_loaded)?;
    Ok(Json(json!({"symptoms": doc.model.vocabulary().symptoms()})))
}

#[derive(Deserialize)]
struct RegisterRequest {
    username: String,
    #[serde(alias = "password")]
    credential: String,
    role: Role,
}

async fn register(State(state): State<Shared>, Body(req): Body<RegisterRequest>) -> Result<impl IntoResponse, ApiError> {
    let records = Arc::clone(&state.records);
    let user = blocking(move || records.register(&req.username, &req.credential, req.role)).await?;
    Ok((StatusCode::CREATED, Json(user)))
}

#[derive(Deserialize)]
struct LoginRequest {
    username: String,
    #[serde(alias = "password")]
    credential: String,
}

#[derive(Serialize)]
struct LoginResponse {
    #[serde(flatten)]
    session: Session,
    username: String,
}

async fn login(State(state): State<Shared>, Body(req): Body<LoginRequest>) -> Result<Json<LoginResponse>, ApiError> {
    let records = Arc::clone(&state.records);
    let username = req.username.trim().to_string();
    let session = blocking(move || records.login(&req.username, &req.credential)).await?;
    Ok(Json(LoginResponse { session, username }))
}

fn model(state: &AppState) -> Result<&ModelDocument, ApiError> {
    state.model.as_ref().ok_or_else(ApiError::model_not_loaded)
}

async fn predict_handler(State(state): State<Shared>, Body(req): Body<PredictRequest>) -> Result<Json<PredictResponse>, ApiError> {
    predict(&model(&state)?.model, &state.recommendations, &req, false).map(Json)
}

async fn quick_diagnosis(State(state): State<Shared>, Body(req): Body<PredictRequest>) -> Result<Json<PredictResponse>, ApiError> {
    predict(&model(&state)?.model, &state.recommendations, &req, true).map(Json)
}

async fn create_record(
    State(state): State<Shared>,
    Authed(session): Authed,
    Body(req): Body<NewRecord>,
) -> Result<impl IntoResponse, ApiError> {
    let records = Arc::clone(&state.records);
    let record = blocking(move || records.create_record(&session.token, req)).await?;
    Ok((StatusCode::CREATED, Json(record)))
}

async fn immutable(Path(rest): Path<String>) -> ApiError {
    ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "immutable", "medical records cannot be modified or deleted")
        .with_details(json!({"record": rest}))
}

async fn history(
    State(state): State<Shared>,
    Authed(session): Authed,
    Path(id): Path<String>,
) -> Result<Json<Vec<MedicalRecord>>, ApiError> {
    let patient_id: u64 = id
        .parse()
        .map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, "bad_request", format!("invalid patient id `{id}`")))?;
    let records = Arc::clone(&state.records);
    blocking(move || records.get_history(&session.token, patient_id)).await.map(Json)
}

async fn schemes(State(state): State<Shared>) -> Result<Json<Value>, ApiError> {
    let unavailable = |m: String| ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "schemes_unavailable", m);
    let path = state.schemes_path.as_ref().ok_or_else(|| unavailable("no schemes file configured".into()))?;
    let text = tokio::fs::read_to_string(path)
        .await
        .map_err(|e| unavailable(format!("cannot read schemes file: {e}")))?;
    if text.trim().is_empty() {
        return Ok(Json(json!([])));
    }
    serde_json::from_str(&text)
        .map(Json)
        .map_err(|e| unavailable(format!("schemes file is not valid JSON: {e}")))
}

/// Serves until `shutdown` resolves, then flushes the records journal.
pub async fn serve(listener: TcpListener, state: Shared, shutdown: impl Future<Output = ()> + Send + 'static) -> std::io::Result<()> {
    let records = Arc::clone(&state.records);
    if let Ok(addr) = listener.local_addr() {
        tracing::info!(%addr, model_loaded = state.model.is_some(), "listening");
    }
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await?;
    records.sync().map_err(|e| std::io::Error::other(e.to_string()))?;
    tracing::info!("shut down");
    Ok(())
}
