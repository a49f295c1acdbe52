//! JSON-over-HTTP transport for [`RewardEngine`].
//!
//! Routes: `POST /v1/reward`, `POST /v1/reward/batch`, `GET /health`.

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::serve::ListenerExt;
use axum::{Json, Router};
use serde_json::{json, Value};
use tokio::net::TcpListener;
use tokio::sync::Semaphore;

use crate::{RewardEngine, RewardError, RewardMode, RewardRequest, RewardResponse};

/// Header carrying the optional shared secret.
pub const SECRET_HEADER: &str = "x-reward-secret";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub request_timeout: Duration,
    /// In-flight requests allowed to call the judge.
    pub judge_concurrency: usize,
    pub shared_secret: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self { request_timeout: Duration::from_secs(30), judge_concurrency: 4, shared_secret: None }
    }
}

struct AppState {
    engine: RewardEngine,
    config: ServiceConfig,
    judge_slots: Semaphore,
    /// Deterministic evaluations are CPU-bound; running more at once than
    /// there are cores only adds blocking threads and context switches.
    eval_slots: Semaphore,
}

pub fn router(engine: RewardEngine, config: ServiceConfig) -> Router {
    let judge_slots = Semaphore::new(config.judge_concurrency.max(1));
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let state = Arc::new(AppState { engine, config, judge_slots, eval_slots: Semaphore::new(cores) });
    Router::new()
        .route("/health", get(health))
        .route("/v1/reward", post(reward_one))
        .route("/v1/reward/batch", post(reward_batch))
        .with_state(state)
}

/// Binds `addr` and serves until the process ends.
pub async fn serve(addr: SocketAddr, engine: RewardEngine, config: ServiceConfig) -> std::io::Result<()> {
    let listener = TcpListener::bind(addr).await?;
    serve_on(listener, engine, config).await
}

pub async fn serve_on(listener: TcpListener, engine: RewardEngine, config: ServiceConfig) -> std::io::Result<()> {
    tracing::info!(addr = %listener.local_addr()?, mode = engine.default_mode().as_str(), "reward service listening");
    // Replies are small; don't let Nagle hold them back.
    let listener = listener.tap_io(|tcp| {
        if let Err(e) = tcp.set_nodelay(true) {
            tracing::warn!("failed to set TCP_NODELAY: {e}");
        }
    });
    axum::serve(listener, router(engine, config)).await
}

fn error_response(status: u16, err: &RewardError) -> Response {
    let mut body = json!({ "error": err.to_string() });
    if let RewardError::BadRequest { field, .. } = err {
        body["field"] = json!(field);
    }
    let code = StatusCode::from_u16(status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (code, Json(body)).into_response()
}

fn reject(err: RewardError) -> Response {
    error_response(err.status(), &err)
}

async fn health(State(state): State<Arc<AppState>>) -> Json<Value> {
    Json(json!({
        "status": "ok",
        "profiles": state.engine.registry().names(),
        "mode": state.engine.default_mode().as_str(),
    }))
}

fn authorized(state: &AppState, headers: &HeaderMap) -> bool {
    match &state.config.shared_secret {
        None => true,
        Some(secret) => headers.get(SECRET_HEADER).and_then(|v| v.to_str().ok()) == Some(secret.as_str()),
    }
}

fn decode_request(value: Value, prefix: &str) -> Result<RewardRequest, RewardError> {
    serde_json::from_value(value).map_err(|e| {
        let msg = e.to_string();
        let field = msg
            .split('`')
            .nth(1)
            .filter(|_| msg.starts_with("missing field") || msg.starts_with("unknown field"))
            .map(|f| format!("{prefix}{f}"))
            .unwrap_or_else(|| if prefix.is_empty() { "body".into() } else { prefix.trim_end_matches('.').into() });
        RewardError::bad(field, msg)
    })
}

fn prefixed(err: RewardError, prefix: &str) -> RewardError {
    match err {
        RewardError::BadRequest { field, message } => RewardError::BadRequest { field: format!("{prefix}{field}"), message },
        other => other,
    }
}

/// Runs the engine off the async executor with the configured timeout.
async fn run(state: Arc<AppState>, requests: Vec<RewardRequest>) -> Result<Vec<RewardResponse>, Response> {
    let needs_judge = requests.iter().any(|r| r.mode.unwrap_or(state.engine.default_mode()) != RewardMode::Deterministic);
    let _permit = if needs_judge {
        Some(state.judge_slots.acquire().await.map_err(|_| reject(RewardError::Internal("service shutting down".into())))?)
    } else {
        None
    };
    let _cpu = if needs_judge {
        None
    } else {
        Some(state.eval_slots.acquire().await.map_err(|_| reject(RewardError::Internal("service shutting down".into())))?)
    };
    let timeout = state.config.request_timeout;
    let engine = state.engine.clone();
    let task = tokio::task::spawn_blocking(move || {
        requests
            .iter()
            .enumerate()
            .map(|(i, r)| engine.evaluate(r).map_err(|e| (i, e)))
            .collect::<Result<Vec<_>, _>>()
    });
    match tokio::time::timeout(timeout, task).await {
        Err(_) => Err(error_response(504, &RewardError::Internal(format!("request exceeded {}s", timeout.as_secs())))),
        Ok(Err(join)) => Err(reject(RewardError::Internal(join.to_string()))),
        Ok(Ok(Err((i, e)))) => {
            tracing::warn!(index = i, error = %e, "reward evaluation failed");
            Err(reject(e))
        }
        Ok(Ok(Ok(out))) => Ok(out),
    }
}

async fn reward_one(State(state): State<Arc<AppState>>, headers: HeaderMap, body: Bytes) -> Response {
    if !authorized(&state, &headers) {
        return (StatusCode::UNAUTHORIZED, Json(json!({ "error": "missing or wrong shared secret" }))).into_response();
    }
    let value: Value = match serde_json::from_slice(&body) {
        Ok(v) => v,
        Err(e) => return reject(RewardError::bad("body", format!("invalid JSON: {e}"))),
    };
    let req = match decode_request(value, "") {
        Ok(r) => r,
        Err(e) => return reject(e),
    };
    if let Err(e) = state.engine.validate(&req) {
        return reject(e);
    }
    match run(state, vec![req]).await {
        Ok(mut out) => Json(out.remove(0)).into_response(),
        Err(resp) => resp,
    }
}

async fn reward_batch(State(state): State<Arc<AppState>>, headers: HeaderMap, body: Bytes) -> Response {
    if !authorized(&state, &headers) {
        return (StatusCode::UNAUTHORIZED, Json(json!({ "error": "missing or wrong shared secret" }))).into_response();
    }
    let items: Vec<Value> = match serde_json::from_slice(&body) {
        Ok(Value::Array(items)) => items,
        Ok(_) => return reject(RewardError::bad("body", "expected a JSON array of reward requests")),
        Err(e) => return reject(RewardError::bad("body", format!("invalid JSON: {e}"))),
    };
    let mut requests = Vec::with_capacity(items.len());
    for (i, item) in items.into_iter().enumerate() {
        let prefix = format!("[{i}].");
        let req = match decode_request(item, &prefix) {
            Ok(r) => r,
            Err(e) => return reject(e),
        };
        if let Err(e) = state.engine.validate(&req) {
            return reject(prefixed(e, &prefix));
        }
        requests.push(req);
    }
    match run(state, requests).await {
        Ok(out) => Json(out).into_response(),
        Err(resp) => resp,
    }
}
