//! HTTP service over an in-memory registry of knowledge base snapshots.
//!
//! Each request reads one immutable snapshot. Loading a knowledge base
//! under an existing id swaps in a new snapshot with the next version.

use std::collections::HashMap;
use std::io::Write;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use obdax_core::reformulate::Direction;
use obdax_core::syntax::serialize_query;
use obdax_core::{parse_kb, parse_query, ConjunctiveQuery, KnowledgeBase, Method};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::ops;
use crate::report::{chain_json, diagnostics_json, kb_json, move_json, summary_json, Failure, Kind};

#[derive(Default)]
pub struct Registry {
    kbs: RwLock<HashMap<String, Arc<KnowledgeBase>>>,
    next: AtomicU64,
}

impl Registry {
    /// Registers a snapshot under a fresh id.
    pub fn insert(&self, kb: KnowledgeBase) -> String {
        let id = format!("kb-{}", self.next.fetch_add(1, Ordering::Relaxed) + 1);
        self.kbs.write().unwrap().insert(id.clone(), Arc::new(kb));
        id
    }

    pub fn get(&self, id: &str) -> Option<Arc<KnowledgeBase>> {
        self.kbs.read().unwrap().get(id).cloned()
    }
}

pub type AppState = Arc<Registry>;

pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, msg: impl Into<String>) -> Self {
        ApiError { status, body: json!({"error": msg.into()}) }
    }

    fn bad_request(msg: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, msg)
    }

    fn diagnostics(what: &str, diags: &[obdax_core::Diagnostic]) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            body: json!({"error": format!("{what} has errors"), "diagnostics": diagnostics_json(diags)}),
        }
    }
}

impl From<Failure> for ApiError {
    fn from(f: Failure) -> Self {
        let status = match f.kind {
            Kind::Diagnostics => StatusCode::BAD_REQUEST,
            Kind::Inconsistent => StatusCode::CONFLICT,
            Kind::Unsupported => StatusCode::UNPROCESSABLE_ENTITY,
            Kind::Stale => StatusCode::GONE,
            Kind::NotFound => StatusCode::NOT_FOUND,
        };
        ApiError { status, body: json!({"error": f.lines.join("\n"), "details": f.lines}) }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

pub fn app(state: AppState) -> Router {
    Router::new()
        .route("/api/kb", post(create_kb))
        .route("/api/kb/:id", axum::routing::put(reload_kb))
        .route("/api/kb/:id/summary", get(summary))
        .route("/api/kb/:id/answers", post(answers))
        .route("/api/kb/:id/moves", post(moves))
        .route("/api/kb/:id/apply", post(apply))
        .route("/api/kb/:id/navigate", post(navigate))
        .with_state(state)
}

/// Serves on `127.0.0.1:port` until the process ends.
pub async fn serve(port: u16, preload: Option<KnowledgeBase>, out: &mut dyn Write) -> std::io::Result<()> {
    let state = AppState::default();
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    writeln!(out, "listening on http://{}", listener.local_addr()?)?;
    if let Some(kb) = preload {
        writeln!(out, "loaded kb_id {}", state.insert(kb))?;
    }
    out.flush()?;
    axum::serve(listener, app(state)).await
}

fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

fn lookup(state: &AppState, id: &str) -> Result<Arc<KnowledgeBase>, ApiError> {
    state.get(id).ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no knowledge base `{id}`")))
}

fn query(text: &str) -> Result<ConjunctiveQuery, ApiError> {
    parse_query(text).map_err(|d| ApiError::diagnostics("query", &d))
}

/// Runs reasoning off the async workers.
async fn blocking<F>(f: F) -> ApiResult
where
    F: FnOnce() -> ApiResult + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .unwrap_or_else(|e| Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())))
}

#[derive(Deserialize)]
struct KbBody {
    kb_text: String,
}

fn build(text: &str, version: u64) -> Result<KnowledgeBase, ApiError> {
    let doc = parse_kb(text).map_err(|d| ApiError::diagnostics("knowledge base", &d))?;
    Ok(KnowledgeBase::new(doc, version))
}

async fn create_kb(State(state): State<AppState>, bytes: Bytes) -> ApiResult {
    let req: KbBody = body(&bytes)?;
    blocking(move || {
        let kb = build(&req.kb_text, 1)?;
        let mut v = kb_json(&kb);
        v["kb_id"] = state.insert(kb).into();
        Ok(Json(v))
    })
    .await
}

async fn reload_kb(State(state): State<AppState>, Path(id): Path<String>, bytes: Bytes) -> ApiResult {
    let req: KbBody = body(&bytes)?;
    let old = lookup(&state, &id)?;
    blocking(move || {
        let kb = build(&req.kb_text, old.version + 1)?;
        let mut v = kb_json(&kb);
        let kb = Arc::new(kb);
        {
            let mut kbs = state.kbs.write().unwrap();
            let current = kbs.get(&id).map_or(0, |k| k.version);
            if current >= kb.version {
                return Err(ApiError::new(StatusCode::CONFLICT, "knowledge base was reloaded concurrently"));
            }
            kbs.insert(id.clone(), kb);
        }
        v["kb_id"] = id.into();
        Ok(Json(v))
    })
    .await
}

async fn summary(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let kb = lookup(&state, &id)?;
    blocking(move || {
        let mut v = summary_json(&kb);
        v["kb_id"] = id.into();
        Ok(Json(v))
    })
    .await
}

#[derive(Deserialize)]
struct AnswersBody {
    query: String,
    k: Option<i64>,
    method: Option<String>,
}

async fn answers(State(state): State<AppState>, Path(id): Path<String>, bytes: Bytes) -> ApiResult {
    let req: AnswersBody = body(&bytes)?;
    let kb = lookup(&state, &id)?;
    let q = query(&req.query)?;
    let method: Method = match &req.method {
        Some(m) => m.parse().map_err(ApiError::bad_request)?,
        None => Method::Auto,
    };
    blocking(move || {
        let a = ops::answer(&kb, &q, method, req.k)?;
        Ok(Json(json!({
            "answers": a.answers.tuples,
            "method": a.method.to_string(),
            "exact": a.exact,
            "rewriting_size": a.rewriting_size,
            "k": a.k,
            "version": kb.version,
        })))
    })
    .await
}

#[derive(Deserialize)]
struct MovesBody {
    query: String,
    direction: String,
    #[serde(default)]
    data_driven: bool,
}

async fn moves(State(state): State<AppState>, Path(id): Path<String>, bytes: Bytes) -> ApiResult {
    let req: MovesBody = body(&bytes)?;
    let kb = lookup(&state, &id)?;
    let q = query(&req.query)?;
    let direction: Direction = req.direction.parse().map_err(ApiError::bad_request)?;
    blocking(move || {
        let ms = ops::moves(&kb, &q, direction, req.data_driven)?;
        Ok(Json(json!({
            "version": kb.version,
            "moves": ms.iter().map(move_json).collect::<Vec<_>>(),
        })))
    })
    .await
}

#[derive(Deserialize)]
struct ApplyBody {
    query: String,
    move_id: String,
}

async fn apply(State(state): State<AppState>, Path(id): Path<String>, bytes: Bytes) -> ApiResult {
    let req: ApplyBody = body(&bytes)?;
    let kb = lookup(&state, &id)?;
    let q = query(&req.query)?;
    blocking(move || {
        let r = ops::apply(&kb, &q, &req.move_id)?;
        Ok(Json(json!({"query": serialize_query(&r)})))
    })
    .await
}

#[derive(Deserialize)]
struct NavigateBody {
    query: String,
    var: String,
    direction: String,
}

async fn navigate(State(state): State<AppState>, Path(id): Path<String>, bytes: Bytes) -> ApiResult {
    let req: NavigateBody = body(&bytes)?;
    let kb = lookup(&state, &id)?;
    let q = query(&req.query)?;
    blocking(move || {
        let chains = ops::navigate(&kb, &q, &req.var, &req.direction)?;
        Ok(Json(json!({"chains": chains.iter().map(chain_json).collect::<Vec<_>>()})))
    })
    .await
}
