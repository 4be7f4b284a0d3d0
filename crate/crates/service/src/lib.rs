//! HTTP/JSON front end for the prosody engine.
//!
//! Every endpoint is a thin wrapper over a synchronous function in [`api`]
//! that returns the status code and the exact response body, so the CLI can
//! produce byte-identical output without going through a socket.

pub mod api;

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use qasida_core::meterdb::PatternDb;
use qasida_core::scansion::ScanOptions;

pub use api::Reply;

/// Shared, read-only state. Requests never mutate it.
#[derive(Debug, Clone)]
pub struct AppState {
    pub db: Arc<PatternDb>,
    pub opts: ScanOptions,
}

impl AppState {
    pub fn new(db: PatternDb, opts: ScanOptions) -> Self {
        AppState { db: Arc::new(db), opts }
    }
}

impl Default for AppState {
    fn default() -> Self {
        AppState::new(PatternDb::seed(), ScanOptions::default())
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/meters", get(meters))
        .route("/v1/analyze", post(analyze))
        .route("/v1/scan", post(scan))
        .with_state(state)
}

impl IntoResponse for Reply {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, [(header::CONTENT_TYPE, "application/json")], self.body).into_response()
    }
}

async fn health(State(s): State<AppState>) -> Reply {
    api::health(&s.db)
}

async fn meters(State(s): State<AppState>) -> Reply {
    api::meters(&s.db)
}

async fn analyze(State(s): State<AppState>, body: Bytes) -> Reply {
    // Matching against every variant is CPU-bound; keep it off the reactor.
    tokio::task::spawn_blocking(move || api::analyze(&s.db, &s.opts, &body))
        .await
        .unwrap_or_else(|e| Reply::internal(&e.to_string()))
}

async fn scan(State(s): State<AppState>, body: Bytes) -> Reply {
    api::scan(&s.opts, &body)
}
