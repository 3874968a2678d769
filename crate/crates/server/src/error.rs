use axum::extract::rejection::JsonRejection;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use medpredict_records::RecordsError;
use serde_json::{json, Value};

/// Every error leaves the server as `{"error": {"code", "message", "details"}}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub details: Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            details: Value::Null,
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    pub fn not_found() -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
    }

    pub fn method_not_allowed() -> Self {
        ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", "method not allowed on this endpoint")
    }

    pub fn unauthorized() -> Self {
        ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing, invalid or expired token")
    }

    pub fn model_not_loaded() -> Self {
        ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "model_not_loaded", "no trained model is loaded")
    }

    pub fn internal(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({
            "error": {"code": self.code, "message": self.message, "details": self.details}
        });
        (self.status, Json(body)).into_response()
    }
}

impl From<RecordsError> for ApiError {
    fn from(e: RecordsError) -> Self {
        let message = e.to_string();
        match e {
            RecordsError::Conflict(_) => ApiError::new(StatusCode::CONFLICT, "conflict", message),
            RecordsError::Validation(_) => ApiError::new(StatusCode::BAD_REQUEST, "validation", message),
            RecordsError::Auth => ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", message),
            RecordsError::Forbidden(_) => ApiError::new(StatusCode::FORBIDDEN, "forbidden", message),
            RecordsError::NotFound(_) => ApiError::new(StatusCode::NOT_FOUND, "not_found", message),
            RecordsError::Immutable(_) => ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "immutable", message),
            RecordsError::Corrupt { .. } | RecordsError::Io(_) => ApiError::internal(message),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", e.body_text())
    }
}
