//! HTTP service that stores instances and runs planning jobs in the
//! background. Clients poll run summaries; plans and traces use the same
//! JSON documents as the command-line tool.

pub mod error;
pub mod store;

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use hopper_core::io;
use serde::{Deserialize, Serialize};

pub use error::ApiError;
pub use store::{Phase, RunRequest, RunStatus, Store};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub listen: String,
    pub run_dir: PathBuf,
    /// Runs beyond this many wait in submission order.
    pub max_concurrent_runs: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            listen: "127.0.0.1:8080".into(),
            run_dir: PathBuf::from("runs"),
            max_concurrent_runs: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        }
    }
}

impl ServiceConfig {
    /// Reads the file named by `HOPPER_SERVICE_CONFIG` if set, then applies
    /// `HOPPER_LISTEN`, `HOPPER_RUN_DIR` and `HOPPER_MAX_RUNS`.
    pub fn from_env() -> Result<Self, String> {
        let mut cfg = match std::env::var_os("HOPPER_SERVICE_CONFIG") {
            Some(path) => {
                let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", PathBuf::from(&path).display()))?;
                serde_json::from_str(&text).map_err(|e| format!("{}: {e}", PathBuf::from(&path).display()))?
            }
            None => ServiceConfig::default(),
        };
        if let Ok(v) = std::env::var("HOPPER_LISTEN") {
            cfg.listen = v;
        }
        if let Some(v) = std::env::var_os("HOPPER_RUN_DIR") {
            cfg.run_dir = v.into();
        }
        if let Ok(v) = std::env::var("HOPPER_MAX_RUNS") {
            cfg.max_concurrent_runs = v.parse().map_err(|_| format!("HOPPER_MAX_RUNS: not a number: {v}"))?;
        }
        Ok(cfg)
    }
}

type AppState = Arc<Store>;

fn json_document(text: String) -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "application/json")], text)
}

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/instances", post(create_instance).get(list_instances))
        .route("/instances/{id}", get(get_instance))
        .route("/runs", post(create_run).get(list_runs))
        .route("/runs/{id}", get(get_run))
        .route("/runs/{id}/cancel", post(cancel_run))
        .route("/runs/{id}/plan", get(get_plan))
        .route("/runs/{id}/trace", get(get_trace))
        .with_state(store)
}

async fn create_instance(State(store): State<AppState>, body: String) -> Result<impl IntoResponse, ApiError> {
    let info = store.add_instance(&body)?;
    Ok((StatusCode::CREATED, Json(info)))
}

async fn list_instances(State(store): State<AppState>) -> impl IntoResponse {
    Json(store.instances())
}

async fn get_instance(State(store): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let inst = store.instance(&id)?;
    Ok(json_document(io::instance_to_json(inst.data())))
}

async fn create_run(State(store): State<AppState>, body: String) -> Result<impl IntoResponse, ApiError> {
    let request: RunRequest = serde_json::from_str(&body).map_err(|e| ApiError::unprocessable(e.to_string()))?;
    let status = store.start_run(request)?;
    Ok((StatusCode::ACCEPTED, Json(status)))
}

async fn list_runs(State(store): State<AppState>) -> impl IntoResponse {
    Json(store.runs())
}

async fn get_run(State(store): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(store.run(&id)?.status()))
}

async fn cancel_run(State(store): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(store.cancel(&id)?))
}

async fn get_plan(State(store): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let run = store.run(&id)?;
    let plan = run.plan().ok_or_else(|| ApiError::conflict(format!("run {id} has no plan yet")))?;
    Ok(json_document(io::plan_to_json(&plan, run.instance())))
}

async fn get_trace(State(store): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let run = store.run(&id)?;
    let doc = run.doc().ok_or_else(|| ApiError::conflict(format!("run {id} has not finished annealing")))?;
    Ok(json_document(io::run_to_json(&doc)))
}
