//! HTTP service over the session store. Every payload is produced by the
//! functions in [`crate::ops`], so it matches the command-line output.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Multipart, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use tower_http::services::ServeDir;

use stratcheck_core::model::export_graph;
use stratcheck_core::verify::Method;

use crate::ops::{self, OpError, ReduceOptions, VerifyOptions};
use crate::store::{content_hash, Job, SessionStore};

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<SessionStore>,
    /// Applied to verification jobs that do not set their own.
    pub timeout: Option<Duration>,
}

pub fn router(state: AppState, assets: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/models", post(post_model))
        .route("/models/{id}/graph", get(get_graph))
        .route("/models/{id}/reduce", post(post_reduce))
        .route("/models/{id}/verify", post(post_verify))
        .route("/models/{id}/results/{job}", get(get_result))
        .route("/bisim", post(post_bisim))
        .route("/stats", get(get_stats))
        .with_state(state);
    match assets {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub async fn serve(listener: tokio::net::TcpListener, state: AppState, assets: Option<PathBuf>) -> std::io::Result<()> {
    axum::serve(listener, router(state, assets)).await
}

struct ApiError(StatusCode, String);

impl From<OpError> for ApiError {
    fn from(e: OpError) -> Self {
        match e {
            OpError::Input(m) => ApiError(StatusCode::BAD_REQUEST, m),
            OpError::Limit(m) => ApiError(StatusCode::UNPROCESSABLE_ENTITY, m),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

fn not_found(what: &str) -> ApiError {
    ApiError(StatusCode::NOT_FOUND, format!("unknown {what}"))
}

fn json_bytes(status: StatusCode, body: Vec<u8>) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn post_model(State(st): State<AppState>, body: String) -> Result<Response, ApiError> {
    let store = st.store.clone();
    let (entry, _) = tokio::task::spawn_blocking(move || store.insert(&body))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let m = &entry.loaded.model;
    Ok(json_bytes(
        StatusCode::OK,
        ops::json_line(&json!({ "id": entry.id, "states": m.num_states(), "edges": m.num_edges() })),
    ))
}

/// Query and body options of a reduction; lists are comma-separated.
#[derive(Debug, Default, Deserialize)]
struct ReduceQuery {
    reduced: Option<bool>,
    c3: Option<String>,
    coalition: Option<String>,
    props: Option<String>,
    format: Option<String>,
}

impl ReduceQuery {
    fn options(&self) -> Result<ReduceOptions, OpError> {
        Ok(ReduceOptions {
            coalition: self.coalition.as_deref().map(ops::split_list),
            props: self.props.as_deref().map(ops::split_list),
            c3: self.c3.as_deref().map(ops::parse_c3).transpose()?,
        })
    }
}

async fn get_graph(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<ReduceQuery>,
) -> Result<Response, ApiError> {
    let entry = st.store.get(&id).ok_or_else(|| not_found("model"))?;
    let format = ops::parse_format(q.format.as_deref().unwrap_or("json"))?;
    let body = if q.reduced.unwrap_or(false) {
        let opts = q.options()?;
        let e = entry.clone();
        tokio::task::spawn_blocking(move || e.reduction(&opts).map(|r| r.export(format)))
            .await
            .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??
    } else {
        export_graph(&entry.loaded.model, format, false)
    };
    let ctype = match format {
        stratcheck_core::model::ExportFormat::Json => "application/json",
        stratcheck_core::model::ExportFormat::Dot => "text/vnd.graphviz",
    };
    Ok((StatusCode::OK, [(header::CONTENT_TYPE, ctype)], body).into_response())
}

#[derive(Debug, Default, Deserialize)]
struct ReduceBody {
    coalition: Option<Vec<String>>,
    props: Option<Vec<String>>,
    c3: Option<String>,
}

async fn post_reduce(
    State(st): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let entry = st.store.get(&id).ok_or_else(|| not_found("model"))?;
    let req: ReduceBody = parse_body(&body)?;
    let opts = ReduceOptions {
        coalition: req.coalition,
        props: req.props,
        c3: req.c3.as_deref().map(ops::parse_c3).transpose()?,
    };
    let bytes = tokio::task::spawn_blocking(move || entry.reduction(&opts).map(|r| r.to_bytes(false)))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(json_bytes(StatusCode::OK, bytes))
}

/// An empty body means all defaults.
fn parse_body<T: Default + for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, OpError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| OpError::Input(format!("request body: {e}")))
}

#[derive(Debug, Default, Deserialize)]
struct VerifyBody {
    method: Option<String>,
    #[serde(default)]
    por: bool,
    c3: Option<String>,
    formula: Option<String>,
    /// Seconds; 0 disables the deadline.
    timeout: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
struct WaitQuery {
    #[serde(default)]
    wait: bool,
}

async fn post_verify(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Query(w): Query<WaitQuery>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let entry = st.store.get(&id).ok_or_else(|| not_found("model"))?;
    let req: VerifyBody = parse_body(&body)?;
    let method: Method = req
        .method
        .as_deref()
        .unwrap_or("bruteforce")
        .parse()
        .map_err(OpError::Input)?;
    let c3 = ops::parse_c3(req.c3.as_deref().unwrap_or("safe"))?;
    let opts = VerifyOptions {
        method,
        por: req.por,
        c3,
        formula: req.formula.clone(),
        timeout: match req.timeout {
            Some(0) => None,
            Some(s) => Some(Duration::from_secs(s)),
            None => st.timeout,
        },
        timings: false,
    };
    // Validate the formula up front so that errors are reported synchronously.
    entry.loaded.formula(opts.formula.as_deref())?;
    let key = format!(
        "{}|{}|{}|{}",
        method.as_str(),
        opts.por,
        ops::c3_name(c3),
        opts.formula.as_deref().unwrap_or("")
    );
    let job = content_hash(key.as_bytes())[..16].to_string();
    if entry.start_job(&job) {
        let e = entry.clone();
        let j = job.clone();
        tokio::task::spawn_blocking(move || {
            let outcome = match ops::run_verify(&e.loaded, &opts) {
                Ok(out) => Job::Done(Arc::new(out.to_bytes())),
                Err(err) => Job::Failed(err.to_string()),
            };
            e.finish_job(&j, outcome);
        });
    }
    if w.wait {
        loop {
            match entry.job(&job) {
                Some(Job::Running) | None => tokio::time::sleep(Duration::from_millis(5)).await,
                Some(done) => return Ok(job_response(&job, done)),
            }
        }
    }
    Ok(job_status(&job, &entry.job(&job).unwrap_or(Job::Running)))
}

fn job_status(job: &str, state: &Job) -> Response {
    let (code, status) = match state {
        Job::Running => (StatusCode::ACCEPTED, "running"),
        Job::Done(_) => (StatusCode::OK, "done"),
        Job::Failed(_) => (StatusCode::OK, "failed"),
    };
    json_bytes(code, ops::json_line(&json!({ "job": job, "status": status })))
}

fn job_response(job: &str, state: Job) -> Response {
    match state {
        Job::Done(bytes) => json_bytes(StatusCode::OK, bytes.to_vec()),
        Job::Failed(msg) => ApiError(StatusCode::UNPROCESSABLE_ENTITY, msg).into_response(),
        Job::Running => job_status(job, &Job::Running),
    }
}

async fn get_result(State(st): State<AppState>, Path((id, job)): Path<(String, String)>) -> Result<Response, ApiError> {
    let entry = st.store.get(&id).ok_or_else(|| not_found("model"))?;
    let state = entry.job(&job).ok_or_else(|| not_found("job"))?;
    Ok(job_response(&job, state))
}

/// Multipart fields `left`, `right`, `relation`, optional `coalition`
/// (comma-separated) and `strict` (`true`/`false`).
async fn post_bisim(mut form: Multipart) -> Result<Response, ApiError> {
    let mut left = None;
    let mut right = None;
    let mut relation = None;
    let mut coalition = None;
    let mut strict = false;
    while let Some(field) = form
        .next_field()
        .await
        .map_err(|e| ApiError(StatusCode::BAD_REQUEST, e.to_string()))?
    {
        let name = field.name().unwrap_or_default().to_string();
        let text = field
            .text()
            .await
            .map_err(|e| ApiError(StatusCode::BAD_REQUEST, e.to_string()))?;
        match name.as_str() {
            "left" => left = Some(text),
            "right" => right = Some(text),
            "relation" => relation = Some(text),
            "coalition" => coalition = Some(ops::split_list(&text)),
            "strict" => strict = matches!(text.trim(), "true" | "1" | "on"),
            _ => return Err(ApiError(StatusCode::BAD_REQUEST, format!("unexpected field `{name}`"))),
        }
    }
    let missing = |f: &str| ApiError(StatusCode::BAD_REQUEST, format!("missing field `{f}`"));
    let left = left.ok_or_else(|| missing("left"))?;
    let right = right.ok_or_else(|| missing("right"))?;
    let relation = relation.ok_or_else(|| missing("relation"))?;
    let out = tokio::task::spawn_blocking(move || {
        ops::run_bisim(
            ("left", &left),
            ("right", &right),
            ("relation", &relation),
            coalition.as_deref(),
            strict,
        )
    })
    .await
    .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(json_bytes(StatusCode::OK, out.to_bytes()))
}

async fn get_stats(State(st): State<AppState>) -> Response {
    json_bytes(StatusCode::OK, ops::json_line(&st.store.stats()))
}
