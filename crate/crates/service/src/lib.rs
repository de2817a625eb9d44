//! HTTP session API so a person can answer a live search's questions.
//!
//! | method | path | body | reply |
//! |---|---|---|---|
//! | POST | `/hierarchies` | edge list, or JSON with a JSON content type | [`HierarchyCreated`] |
//! | POST | `/sessions` | [`CreateSession`] | [`Step`] |
//! | POST | `/sessions/{id}/answer` | [`SubmitAnswer`] | [`Step`] |
//! | GET | `/sessions/{id}` | | [`Snapshot`] |
//!
//! Errors are `{"code", "message"}` with a matching status. Every question
//! carries a token; resubmitting a used token with the same answer replays the
//! earlier reply, with a different answer it is rejected.

mod error;
mod store;
mod wire;

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap};
use axum::routing::{get, post};
use axum::{Json, Router};
use kbm_igs::Format;
use serde::de::DeserializeOwned;

pub use error::ApiError;
pub use store::Store;
pub use wire::{CreateSession, HierarchyCreated, HistoryItem, Snapshot, Step, SubmitAnswer, VertexView, WireAnswer};

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/hierarchies", post(upload_hierarchy))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/answer", post(submit_answer))
        .with_state(store)
}

pub async fn serve(addr: SocketAddr, store: Arc<Store>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(store)).await
}

fn parse<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid body: {e}")))
}

/// Engine work can take a while on large trees, so it runs off the async
/// workers.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

async fn upload_hierarchy(
    State(store): State<Arc<Store>>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Json<HierarchyCreated>, ApiError> {
    let text = String::from_utf8(body.to_vec()).map_err(|_| ApiError::bad_request("body is not UTF-8"))?;
    let json_type = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.contains("json"));
    let format = if json_type || text.trim_start().starts_with('{') {
        Format::Json
    } else {
        Format::EdgeList
    };
    blocking(move || store.upload(&text, format)).await.map(Json)
}

async fn create_session(State(store): State<Arc<Store>>, body: Bytes) -> Result<Json<Step>, ApiError> {
    let req: CreateSession = parse(&body)?;
    blocking(move || store.create_session(&req.hierarchy_id, &req.algo, req.b, req.k))
        .await
        .map(Json)
}

async fn submit_answer(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<Step>, ApiError> {
    let req: SubmitAnswer = parse(&body)?;
    blocking(move || store.submit_answer(&id, req.answer.into(), &req.token))
        .await
        .map(Json)
}

async fn get_session(State(store): State<Arc<Store>>, Path(id): Path<String>) -> Result<Json<Snapshot>, ApiError> {
    blocking(move || store.snapshot(&id)).await.map(Json)
}
