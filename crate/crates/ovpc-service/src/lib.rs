//! HTTP service for the visible-point mapping pipeline.
//!
//! Stateless endpoints run one pipeline stage per call; sessions hold a scan
//! buffer and the latest built map, mirroring the online mapper: a writer
//! pushes scans and triggers frames while planner clients issue read-only
//! queries against the most recent map.

mod error;
mod handlers;
mod state;

use std::net::SocketAddr;

use axum::routing::{delete, get, post};
use axum::Router;
use tokio::net::TcpListener;

pub use state::AppState;

pub fn router() -> Router {
    Router::new()
        .route("/healthz", get(handlers::health))
        .route("/v1/visible", post(handlers::visible))
        .route("/v1/mesh", post(handlers::mesh))
        .route("/v1/navmap", post(handlers::navmap))
        .route("/v1/query/nearest", post(handlers::query_nearest))
        .route("/v1/query/project", post(handlers::query_project))
        .route("/v1/query/collide", post(handlers::query_collide))
        .route("/v1/eval/sweep", post(handlers::eval_sweep))
        .route("/v1/bench", post(handlers::bench))
        .route("/v1/sessions", post(handlers::session_create))
        .route("/v1/sessions/{id}", delete(handlers::session_delete))
        .route("/v1/sessions/{id}/scans", post(handlers::session_push_scan))
        .route("/v1/sessions/{id}/frame", post(handlers::session_frame))
        .route(
            "/v1/sessions/{id}/query/nearest",
            post(handlers::session_nearest),
        )
        .route(
            "/v1/sessions/{id}/query/project",
            post(handlers::session_project),
        )
        .route(
            "/v1/sessions/{id}/query/collide",
            post(handlers::session_collide),
        )
        .with_state(AppState::new())
}

/// Serves on the given listener until the task is dropped.
pub async fn serve(listener: TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router()).await
}

/// Binds an ephemeral local port and serves in a background task. Returns the
/// bound address; the server lives as long as the runtime.
pub async fn spawn_ephemeral() -> std::io::Result<SocketAddr> {
    let listener = TcpListener::bind("127.0.0.1:0").await?;
    let addr = listener.local_addr()?;
    tokio::spawn(async move {
        if let Err(err) = serve(listener).await {
            tracing::error!("embedded server stopped: {err}");
        }
    });
    Ok(addr)
}
