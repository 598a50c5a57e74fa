//! HTTP face of the gateway.
//!
//! | method | path                                   | body                        |
//! |--------|----------------------------------------|-----------------------------|
//! | POST   | /api/v1/telemetry                      | record → `{"id": n}` (201)  |
//! | GET    | /api/v1/patients/{device_id}/latest    | record                      |
//! | GET    | /api/v1/patients/{device_id}/history   | records (`since_ms`, `limit`) |
//! | GET    | /api/v1/alerts                         | records (`since_ms`)        |
//! | GET    | /status                                | plain text                  |
//!
//! Reads share the store; an ingest holds it exclusively until its log line
//! is written, so no response precedes the append.

use std::net::SocketAddr;
use std::sync::{Arc, RwLock};

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use super::{GatewayError, Store, TelemetryRecord, DEFAULT_HISTORY_LIMIT};

pub const DEFAULT_PORT: u16 = 8080;
pub const PORT_ENV: &str = "PARACOM_PORT";

pub type SharedStore = Arc<RwLock<Store>>;

impl IntoResponse for GatewayError {
    fn into_response(self) -> Response {
        let (status, body) = match &self {
            GatewayError::Validation(e) => (
                StatusCode::UNPROCESSABLE_ENTITY,
                json!({ "error": "validation", "field": e.field, "reason": e.reason }),
            ),
            GatewayError::NotFound(d) => {
                (StatusCode::NOT_FOUND, json!({ "error": "not_found", "device_id": d }))
            }
            GatewayError::BadLimit => {
                (StatusCode::BAD_REQUEST, json!({ "error": "bad_request", "reason": self.to_string() }))
            }
            _ => (
                StatusCode::INTERNAL_SERVER_ERROR,
                json!({ "error": "storage", "reason": self.to_string() }),
            ),
        };
        (status, Json(body)).into_response()
    }
}

#[derive(Debug, Deserialize)]
struct HistoryParams {
    #[serde(default)]
    since_ms: u64,
    limit: Option<usize>,
}

#[derive(Debug, Deserialize)]
struct SinceParams {
    #[serde(default)]
    since_ms: u64,
}

fn poisoned() -> Response {
    (StatusCode::INTERNAL_SERVER_ERROR, "store lock poisoned").into_response()
}

async fn ingest(State(store): State<SharedStore>, Json(record): Json<TelemetryRecord>) -> Response {
    let Ok(mut guard) = store.write() else { return poisoned() };
    match guard.ingest(record) {
        Ok(id) => (StatusCode::CREATED, Json(json!({ "id": id }))).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn latest(State(store): State<SharedStore>, Path(device_id): Path<u16>) -> Response {
    let Ok(guard) = store.read() else { return poisoned() };
    match guard.latest(device_id) {
        Ok(r) => Json(r).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn history(
    State(store): State<SharedStore>,
    Path(device_id): Path<u16>,
    Query(params): Query<HistoryParams>,
) -> Response {
    let Ok(guard) = store.read() else { return poisoned() };
    match guard.history(device_id, params.since_ms, params.limit.unwrap_or(DEFAULT_HISTORY_LIMIT)) {
        Ok(r) => Json(r).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn alerts(State(store): State<SharedStore>, Query(params): Query<SinceParams>) -> Response {
    let Ok(guard) = store.read() else { return poisoned() };
    Json(guard.alerts(params.since_ms)).into_response()
}

async fn status(State(store): State<SharedStore>) -> Response {
    let Ok(guard) = store.read() else { return poisoned() };
    ([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], guard.status_page()).into_response()
}

pub fn router(store: SharedStore) -> Router {
    Router::new()
        .route("/api/v1/telemetry", post(ingest))
        .route("/api/v1/patients/{device_id}/latest", get(latest))
        .route("/api/v1/patients/{device_id}/history", get(history))
        .route("/api/v1/alerts", get(alerts))
        .route("/status", get(status))
        .with_state(store)
}

/// Port from `PARACOM_PORT` when set and valid, else `fallback`.
pub fn port_from_env(fallback: u16) -> u16 {
    std::env::var(PORT_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(fallback)
}

pub async fn serve(addr: SocketAddr, store: SharedStore) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(store)).await
}
