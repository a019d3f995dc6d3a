//! JSON-over-HTTP interface to a [`SessionStore`].
//!
//! | method | path | body / response |
//! |---|---|---|
//! | POST | `/sessions` | multipart with one PDF file, returns the session summary |
//! | GET | `/sessions/{id}` | session summary |
//! | GET | `/sessions/{id}/steps/{n}` | step view with the current revision |
//! | PUT | `/sessions/{id}/steps/{n}` | `{expected_revision, actions}`, returns the new step view |
//! | POST | `/sessions/{id}/export` | tagged PDF |
//! | GET | `/sessions/{id}/pages/{n}/geometry` | operator and region boxes |
//! | GET | `/sessions/{id}/tagmap` | the tagmap, with the revision in `ETag` |
//!
//! Errors come back as `{"error": code, "message": text}` plus
//! `violations` for validation failures.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{DefaultBodyLimit, Multipart, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::json;

use super::{SessionStore, StepUpdate};
use crate::error::Error;

const MAX_UPLOAD: usize = 64 * 1024 * 1024;

pub struct ApiError(pub Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

pub fn status_of(e: &Error) -> StatusCode {
    match e {
        Error::UnknownSession(_) | Error::UnknownStep(_) | Error::IndexOutOfRange { .. } => StatusCode::NOT_FOUND,
        Error::RevisionConflict { .. } => StatusCode::CONFLICT,
        Error::MalformedPdf { .. } | Error::InvalidInput(_) | Error::Json(_) => StatusCode::BAD_REQUEST,
        Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = status_of(&self.0);
        if status.is_server_error() {
            log::error!("{}", self.0);
        }
        let mut body = json!({ "error": self.0.code(), "message": self.0.to_string() });
        if !self.0.violations().is_empty() {
            body["violations"] = json!(self.0.violations());
        }
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

async fn blocking<T: Send + 'static>(
    store: Arc<SessionStore>,
    f: impl FnOnce(&SessionStore) -> crate::Result<T> + Send + 'static,
) -> ApiResult<T> {
    tokio::task::spawn_blocking(move || f(&store))
        .await
        .map_err(|e| ApiError(Error::Io(std::io::Error::other(e.to_string()))))?
        .map_err(ApiError)
}

async fn create(State(store): State<Arc<SessionStore>>, mut form: Multipart) -> ApiResult<Response> {
    let field = form
        .next_field()
        .await
        .map_err(|e| Error::InvalidInput(e.to_string()))?
        .ok_or_else(|| Error::InvalidInput("multipart body carries no file".into()))?;
    let pdf = field.bytes().await.map_err(|e| Error::InvalidInput(e.to_string()))?.to_vec();
    let summary = blocking(store, move |s| s.create(&pdf)).await?;
    Ok((StatusCode::CREATED, Json(summary)).into_response())
}

async fn summary(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(blocking(store, move |s| s.summary(&id)).await?).into_response())
}

async fn get_step(State(store): State<Arc<SessionStore>>, Path((id, n)): Path<(String, u8)>) -> ApiResult<Response> {
    Ok(Json(blocking(store, move |s| s.step(&id, n)).await?).into_response())
}

async fn put_step(
    State(store): State<Arc<SessionStore>>,
    Path((id, n)): Path<(String, u8)>,
    body: axum::body::Bytes,
) -> ApiResult<Response> {
    let update: StepUpdate = serde_json::from_slice(&body).map_err(Error::Json)?;
    Ok(Json(blocking(store, move |s| s.apply(&id, n, &update)).await?).into_response())
}

async fn export(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> ApiResult<Response> {
    let name = format!("attachment; filename=\"{id}-tagged.pdf\"");
    let bytes = blocking(store, move |s| s.export(&id)).await?;
    Ok(([(header::CONTENT_TYPE, "application/pdf".to_string()), (header::CONTENT_DISPOSITION, name)], bytes)
        .into_response())
}

async fn geometry(State(store): State<Arc<SessionStore>>, Path((id, n)): Path<(String, u32)>) -> ApiResult<Response> {
    Ok(Json(blocking(store, move |s| s.geometry(&id, n)).await?).into_response())
}

async fn tagmap(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> ApiResult<Response> {
    let (revision, map) = blocking(store, move |s| s.tagmap(&id)).await?;
    Ok(([(header::ETAG, format!("\"{revision}\""))], Json(map)).into_response())
}

pub fn router(store: Arc<SessionStore>) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(summary))
        .route("/sessions/{id}/steps/{n}", get(get_step).put(put_step))
        .route("/sessions/{id}/export", post(export))
        .route("/sessions/{id}/pages/{n}/geometry", get(geometry))
        .route("/sessions/{id}/tagmap", get(tagmap))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD))
        .with_state(store)
}

/// Serves the API until the process is stopped.
pub async fn serve(store: Arc<SessionStore>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(store)).await
}
