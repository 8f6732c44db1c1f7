use std::sync::Arc;

use axum::extract::{Path, State};
use axum::Json;
use uuid::Uuid;

use ovpc_api as api;
use ovpc_core::buffer::{CloudBuffer, Scan};
use ovpc_core::eval::run_normal_sweep;
use ovpc_core::ghpr::{ghpr_visible, lift_hull_to_original};
use ovpc_core::navmap::{collision_check, nearest_visible, project_state, NavMap};
use ovpc_core::traversability::{face_labels, vertex_attributes};

use crate::error::ApiError;
use crate::state::{AppState, Session};

pub async fn health() -> &'static str {
    "ok"
}

/// Runs a CPU-heavy closure off the async workers.
async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker panicked: {e}")))?
}

pub async fn visible(
    Json(req): Json<api::VisibleRequest>,
) -> Result<Json<api::VisibleResponse>, ApiError> {
    blocking(move || {
        let result = ghpr_visible(&req.cloud, &req.ghpr.to_config())?;
        Ok(Json(api::VisibleResponse {
            visible_indices: result.visible_indices,
            dropped_near: result.dropped_near,
            usable_points: result.kept.len(),
        }))
    })
    .await
}

pub async fn mesh(Json(req): Json<api::MeshRequest>) -> Result<Json<api::MeshResponse>, ApiError> {
    blocking(move || {
        let ghpr_cfg = req.ghpr.to_config();
        let result = ghpr_visible(&req.cloud, &ghpr_cfg)?;
        let mesh = lift_hull_to_original(&req.cloud, &ghpr_cfg, &result);
        let labels = face_labels(&mesh, &req.traversability.to_config())?;
        Ok(Json(api::MeshResponse {
            visible_count: result.visible_indices.len(),
            dropped_near: result.dropped_near,
            mesh,
            face_labels: labels,
        }))
    })
    .await
}

fn build_map_response(
    cloud: &ovpc_core::PointCloud,
    ghpr: &ovpc_core::ghpr::GhprConfig,
    trav: &ovpc_core::traversability::TraversabilityConfig,
    include_mesh: bool,
) -> Result<(NavMap, Option<ovpc_core::TriangleMesh>, Option<Vec<ovpc_core::traversability::FaceLabel>>), ApiError> {
    let mesh = ovpc_core::ghpr::build_ovpc_mesh(cloud, ghpr)?;
    let labels = face_labels(&mesh, trav)?;
    let (normals, traversable) = vertex_attributes(&mesh, &labels)?;
    let map = NavMap::new(
        mesh.vertices.clone(),
        normals,
        traversable,
        mesh.source_index.clone(),
        ghpr.viewpoint,
    );
    if include_mesh {
        Ok((map, Some(mesh), Some(labels)))
    } else {
        Ok((map, None, None))
    }
}

pub async fn navmap(
    Json(req): Json<api::NavmapRequest>,
) -> Result<Json<api::NavmapResponse>, ApiError> {
    blocking(move || {
        let (navmap, mesh, labels) = build_map_response(
            &req.cloud,
            &req.ghpr.to_config(),
            &req.traversability.to_config(),
            req.include_mesh,
        )?;
        Ok(Json(api::NavmapResponse {
            navmap,
            mesh,
            face_labels: labels,
        }))
    })
    .await
}

pub async fn query_nearest(
    Json(req): Json<api::NearestRequest>,
) -> Result<Json<api::NearestResponse>, ApiError> {
    let nearest = nearest_visible(&req.navmap, &req.query)?;
    Ok(Json(api::NearestResponse { nearest }))
}

pub async fn query_project(
    Json(req): Json<api::ProjectRequest>,
) -> Result<Json<api::ProjectResponse>, ApiError> {
    let pose = project_state(&req.navmap, &req.state, req.z_ref)?;
    Ok(Json(api::ProjectResponse {
        pose: api::PoseDto::from_pose(&pose),
    }))
}

pub async fn query_collide(
    Json(req): Json<api::CollideRequest>,
) -> Result<Json<api::CollideResponse>, ApiError> {
    let pose = req
        .pose
        .to_pose()
        .map_err(|m| ApiError::usage(format!("invalid pose: {m}")))?;
    let report = collision_check(&req.navmap, &pose, &req.robot)?;
    Ok(Json(api::CollideResponse { report }))
}

pub async fn eval_sweep(
    Json(req): Json<api::SweepRequest>,
) -> Result<Json<api::SweepResponse>, ApiError> {
    blocking(move || {
        let table = run_normal_sweep(&req.template, &req.config)?;
        Ok(Json(api::SweepResponse { table }))
    })
    .await
}

pub async fn bench(Json(req): Json<api::BenchRequest>) -> Result<Json<api::BenchResponse>, ApiError> {
    blocking(move || {
        let stats = ovpc_core::bench::time_pipeline(
            &req.clouds,
            &req.ghpr.to_config(),
            &req.traversability.to_config(),
            req.iterations,
        )?;
        Ok(Json(api::BenchResponse { stats }))
    })
    .await
}

// ---------------------------------------------------------------------------
// Sessions
// ---------------------------------------------------------------------------

pub async fn session_create(
    State(state): State<AppState>,
    Json(req): Json<api::CreateSessionRequest>,
) -> Result<Json<api::CreateSessionResponse>, ApiError> {
    let buffer_cfg = req.buffer.to_config();
    buffer_cfg.validate()?;
    let ghpr = req.ghpr.to_config();
    ghpr.validate()?;
    let trav = req.traversability.to_config();
    trav.validate()?;
    let session = Session {
        buffer: CloudBuffer::new(buffer_cfg.capacity),
        buffer_cfg,
        ghpr,
        trav,
        latest: None,
    };
    let session_id = state.insert_session(session).await;
    Ok(Json(api::CreateSessionResponse { session_id }))
}

pub async fn session_delete(
    State(state): State<AppState>,
    Path(id): Path<Uuid>,
) -> Result<Json<serde_json::Value>, ApiError> {
    if state.remove_session(id).await {
        Ok(Json(serde_json::json!({ "deleted": true })))
    } else {
        Err(ApiError::not_found(format!("no session {id}")))
    }
}

async fn get_session(state: &AppState, id: Uuid) -> Result<Arc<tokio::sync::Mutex<Session>>, ApiError> {
    state
        .session(id)
        .await
        .ok_or_else(|| ApiError::not_found(format!("no session {id}")))
}

pub async fn session_push_scan(
    State(state): State<AppState>,
    Path(id): Path<Uuid>,
    Json(req): Json<api::PushScanRequest>,
) -> Result<Json<api::PushScanResponse>, ApiError> {
    let session = get_session(&state, id).await?;
    let pose = req
        .pose
        .to_pose()
        .map_err(|m| ApiError::usage(format!("invalid pose: {m}")))?;
    let mut guard = session.lock().await;
    guard.buffer.push_scan(Scan {
        cloud: req.cloud,
        pose,
        timestamp: req.timestamp,
    })?;
    Ok(Json(api::PushScanResponse {
        scans_buffered: guard.buffer.len(),
    }))
}

pub async fn session_frame(
    State(state): State<AppState>,
    Path(id): Path<Uuid>,
    Json(req): Json<api::FrameRequest>,
) -> Result<Json<api::FrameResponse>, ApiError> {
    let session = get_session(&state, id).await?;
    let target = req
        .target
        .to_pose()
        .map_err(|m| ApiError::usage(format!("invalid target pose: {m}")))?;
    // Holding the lock across the build serializes frame generation per
    // session; queries keep reading the previous map meanwhile.
    let mut guard = session.lock().await;
    let buffer = guard.buffer.clone();
    let buffer_cfg = guard.buffer_cfg;
    let ghpr = guard.ghpr;
    let trav = guard.trav;
    let include_mesh = req.include_mesh;
    let (navmap, mesh, labels, assembled_points) = blocking(move || {
        let assembled = buffer.assemble(&target, &buffer_cfg)?;
        let count = assembled.len();
        let (navmap, mesh, labels) = build_map_response(&assembled, &ghpr, &trav, include_mesh)?;
        Ok((navmap, mesh, labels, count))
    })
    .await?;
    guard.latest = Some(Arc::new(navmap.clone()));
    Ok(Json(api::FrameResponse {
        navmap,
        mesh,
        face_labels: labels,
        assembled_points,
    }))
}

async fn latest_map(state: &AppState, id: Uuid) -> Result<Arc<NavMap>, ApiError> {
    let session = get_session(state, id).await?;
    let guard = session.lock().await;
    guard.latest.clone().ok_or_else(|| ApiError {
        status: axum::http::StatusCode::CONFLICT,
        kind: "geometry",
        message: "session has no built frame yet".into(),
    })
}

pub async fn session_nearest(
    State(state): State<AppState>,
    Path(id): Path<Uuid>,
    Json(req): Json<api::SessionQueryNearest>,
) -> Result<Json<api::NearestResponse>, ApiError> {
    let map = latest_map(&state, id).await?;
    let nearest = nearest_visible(&map, &req.query)?;
    Ok(Json(api::NearestResponse { nearest }))
}

pub async fn session_project(
    State(state): State<AppState>,
    Path(id): Path<Uuid>,
    Json(req): Json<api::SessionQueryProject>,
) -> Result<Json<api::ProjectResponse>, ApiError> {
    let map = latest_map(&state, id).await?;
    let pose = project_state(&map, &req.state, req.z_ref)?;
    Ok(Json(api::ProjectResponse {
        pose: api::PoseDto::from_pose(&pose),
    }))
}

pub async fn session_collide(
    State(state): State<AppState>,
    Path(id): Path<Uuid>,
    Json(req): Json<api::SessionQueryCollide>,
) -> Result<Json<api::CollideResponse>, ApiError> {
    let map = latest_map(&state, id).await?;
    let pose = req
        .pose
        .to_pose()
        .map_err(|m| ApiError::usage(format!("invalid pose: {m}")))?;
    let report = collision_check(&map, &pose, &req.robot)?;
    Ok(Json(api::CollideResponse { report }))
}
