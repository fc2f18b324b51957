//! Local HTTP service: compile endpoint, ontology stats, icon files and a
//! health check.
//!
//! Requests compile against the current ontology snapshot. Concepts admitted
//! by the fallback go through the store's single writer, which persists and
//! swaps the served snapshot.

use std::path::{Component, Path, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use nim_core::binding_translate::TranslationProvider;
use nim_core::decompose::ErrorClass;
use nim_core::llm_fallback::CompletionProvider;
use nim_core::serialize::to_wire_json;
use nim_core::{Compiler, OntologyStore, Providers};
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<OntologyStore>,
    pub compiler: Arc<Compiler>,
    pub fallback: Option<Arc<dyn CompletionProvider>>,
    pub translator: Arc<dyn TranslationProvider>,
    /// Directory icon paths in the manifest are relative to.
    pub icons_base: Option<PathBuf>,
    pub limit: Arc<Semaphore>,
    pub admit: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompileRequest {
    text: String,
    #[serde(default)]
    binding_lang: Option<String>,
}

#[derive(Debug, Serialize)]
struct ErrorBody<'a> {
    error: String,
    stage: &'a str,
}

fn error(status: StatusCode, stage: &str, message: impl Into<String>) -> Response {
    let body = serde_json::to_vec(&ErrorBody {
        error: message.into(),
        stage,
    })
    .expect("error body serializes");
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn status_of(class: ErrorClass) -> StatusCode {
    match class {
        ErrorClass::Input => StatusCode::BAD_REQUEST,
        ErrorClass::Provider => StatusCode::BAD_GATEWAY,
        ErrorClass::Ontology => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/v1/compile", post(compile))
        .route("/v1/ontology/stats", get(stats))
        .route("/v1/icons/{id}", get(icon))
        .route("/healthz", get(|| async { "ok" }))
        .with_state(state)
}

async fn compile(State(state): State<AppState>, body: Bytes) -> Response {
    let req: CompileRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, "request", e.to_string()),
    };
    let Ok(_permit) = Arc::clone(&state.limit).acquire_owned().await else {
        return error(StatusCode::SERVICE_UNAVAILABLE, "service", "shutting down");
    };
    let worker = state.clone();
    let result = tokio::task::spawn_blocking(move || {
        let snapshot = worker.store.snapshot();
        let lang = req
            .binding_lang
            .unwrap_or_else(|| worker.compiler.config.binding_lang.clone());
        let providers = Providers {
            fallback: worker.fallback.as_deref(),
            translator: worker.translator.as_ref(),
            clock: None,
        };
        let out = worker.compiler.compile_to(&req.text, &lang, &snapshot, providers)?;
        if worker.admit && !out.admitted.is_empty() {
            worker.store.admit(&out.admitted)?;
        }
        Ok::<_, nim_core::CompileError>(out.message)
    })
    .await;
    match result {
        Ok(Ok(message)) => (
            StatusCode::OK,
            [(header::CONTENT_TYPE, "application/json")],
            to_wire_json(&message),
        )
            .into_response(),
        Ok(Err(e)) => error(status_of(e.class()), e.stage(), e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, "service", e.to_string()),
    }
}

#[derive(Serialize)]
struct StatsBody {
    version: u64,
    #[serde(flatten)]
    stats: nim_core::ontology::OntologyStats,
}

async fn stats(State(state): State<AppState>) -> Response {
    let o = state.store.snapshot();
    let body = StatsBody {
        version: o.version,
        stats: o.stats(),
    };
    (
        [(header::CONTENT_TYPE, "application/json")],
        serde_json::to_vec(&body).expect("stats serialize"),
    )
        .into_response()
}

/// Manifest paths must stay inside the icon directory.
fn safe_relative(p: &Path) -> bool {
    p.components()
        .all(|c| matches!(c, Component::Normal(_) | Component::CurDir))
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("gif") => "image/gif",
        Some("webp") => "image/webp",
        _ => "application/octet-stream",
    }
}

async fn icon(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> Response {
    let not_found = || error(StatusCode::NOT_FOUND, "icons", format!("unknown icon `{id}`"));
    let snapshot = state.store.snapshot();
    let (Some(base), Some(rel)) = (&state.icons_base, snapshot.icon_manifest.get(&id)) else {
        return not_found();
    };
    let rel = Path::new(rel);
    if !safe_relative(rel) {
        return not_found();
    }
    let path = base.join(rel);
    match tokio::fs::read(&path).await {
        Ok(bytes) => ([(header::CONTENT_TYPE, content_type(&path))], bytes).into_response(),
        Err(_) => not_found(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icon_paths_are_confined() {
        assert!(safe_relative(Path::new("icons/sc.things.svg")));
        assert!(!safe_relative(Path::new("../secret")));
        assert!(!safe_relative(Path::new("/etc/passwd")));
        assert_eq!(content_type(Path::new("a.svg")), "image/svg+xml");
    }
}
