//! Request/response types of the mapping service HTTP API. Geometry payloads
//! reuse the core serde representations; parameter blocks mirror the core
//! configs with explicit defaults so clients can send only what they set.

use serde::{Deserialize, Serialize};
use uuid::Uuid;

use ovpc_core::bench::BenchStats;
use ovpc_core::eval::{SceneSpec, SweepConfig, SweepTable};
use ovpc_core::geom::{Point3, PointCloud, Pose3, TriangleMesh, UnitQuat};
use ovpc_core::ghpr::GhprConfig;
use ovpc_core::navmap::{CollisionReport, Nearest, NavMap, RobotBox, Se2State};
use ovpc_core::traversability::{FaceLabel, TraversabilityConfig};

/// Error envelope returned with every non-2xx status.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBody {
    /// One of `usage`, `data`, `geometry`, `not_found`, `internal`.
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GhprParams {
    pub viewpoint: Point3,
    #[serde(default = "GhprParams::default_gamma")]
    pub gamma: f64,
    #[serde(default = "GhprParams::default_min_range")]
    pub min_range: f64,
}

impl GhprParams {
    fn default_gamma() -> f64 {
        GhprConfig::DEFAULT_GAMMA
    }

    fn default_min_range() -> f64 {
        GhprConfig::DEFAULT_MIN_RANGE
    }

    pub fn at(viewpoint: Point3) -> Self {
        Self {
            viewpoint,
            gamma: Self::default_gamma(),
            min_range: Self::default_min_range(),
        }
    }

    pub fn to_config(self) -> GhprConfig {
        GhprConfig {
            viewpoint: self.viewpoint,
            gamma: self.gamma,
            min_range: self.min_range,
            ..GhprConfig::at(self.viewpoint)
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TravParams {
    #[serde(default = "TravParams::default_alpha_max_deg")]
    pub alpha_max_deg: f64,
    #[serde(default = "TravParams::default_dh_max")]
    pub dh_max: f64,
}

impl Default for TravParams {
    fn default() -> Self {
        Self {
            alpha_max_deg: Self::default_alpha_max_deg(),
            dh_max: Self::default_dh_max(),
        }
    }
}

impl TravParams {
    fn default_alpha_max_deg() -> f64 {
        30.0
    }

    fn default_dh_max() -> f64 {
        TraversabilityConfig::default().dh_max
    }

    pub fn to_config(self) -> TraversabilityConfig {
        TraversabilityConfig {
            alpha_max: self.alpha_max_deg.to_radians(),
            dh_max: self.dh_max,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BufferParams {
    #[serde(default = "BufferParams::default_capacity")]
    pub capacity: usize,
    #[serde(default = "BufferParams::default_voxel_size")]
    pub voxel_size: f64,
    #[serde(default = "BufferParams::default_min_points_per_voxel")]
    pub min_points_per_voxel: usize,
}

impl Default for BufferParams {
    fn default() -> Self {
        let cfg = ovpc_core::buffer::BufferConfig::default();
        Self {
            capacity: cfg.capacity,
            voxel_size: cfg.voxel_size,
            min_points_per_voxel: cfg.min_points_per_voxel,
        }
    }
}

impl BufferParams {
    fn default_capacity() -> usize {
        ovpc_core::buffer::BufferConfig::default().capacity
    }

    fn default_voxel_size() -> f64 {
        ovpc_core::buffer::BufferConfig::default().voxel_size
    }

    fn default_min_points_per_voxel() -> usize {
        ovpc_core::buffer::BufferConfig::default().min_points_per_voxel
    }

    pub fn to_config(self) -> ovpc_core::buffer::BufferConfig {
        ovpc_core::buffer::BufferConfig {
            capacity: self.capacity,
            voxel_size: self.voxel_size,
            min_points_per_voxel: self.min_points_per_voxel,
        }
    }
}

/// Rigid pose on the wire: translation plus unit quaternion (w first).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PoseDto {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub qw: f64,
    pub qx: f64,
    pub qy: f64,
    pub qz: f64,
}

impl PoseDto {
    pub fn identity() -> Self {
        Self::from_pose(&Pose3::identity())
    }

    pub fn from_pose(pose: &Pose3) -> Self {
        let t = pose.translation.vector;
        let q = pose.rotation.quaternion();
        Self {
            x: t.x,
            y: t.y,
            z: t.z,
            qw: q.w,
            qx: q.i,
            qy: q.j,
            qz: q.k,
        }
    }

    /// Fails when the quaternion is not unit within 1e-9.
    pub fn to_pose(self) -> Result<Pose3, String> {
        let quat = nalgebra::Quaternion::new(self.qw, self.qx, self.qy, self.qz);
        let norm = quat.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(format!("quaternion norm {norm} is not unit within 1e-9"));
        }
        Ok(Pose3::from_parts(
            nalgebra::Translation3::new(self.x, self.y, self.z),
            UnitQuat::from_quaternion(quat),
        ))
    }
}

// ---------------------------------------------------------------------------
// Stateless pipeline operations
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshRequest {
    pub cloud: PointCloud,
    pub ghpr: GhprParams,
    #[serde(default)]
    pub traversability: TravParams,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshResponse {
    pub mesh: TriangleMesh,
    pub face_labels: Vec<FaceLabel>,
    pub visible_count: usize,
    pub dropped_near: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VisibleRequest {
    pub cloud: PointCloud,
    pub ghpr: GhprParams,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VisibleResponse {
    pub visible_indices: Vec<usize>,
    pub dropped_near: usize,
    pub usable_points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NavmapRequest {
    pub cloud: PointCloud,
    pub ghpr: GhprParams,
    #[serde(default)]
    pub traversability: TravParams,
    #[serde(default)]
    pub include_mesh: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NavmapResponse {
    pub navmap: NavMap,
    pub mesh: Option<TriangleMesh>,
    pub face_labels: Option<Vec<FaceLabel>>,
}

// ---------------------------------------------------------------------------
// Map queries (map shipped inline)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NearestRequest {
    pub navmap: NavMap,
    pub query: Point3,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NearestResponse {
    pub nearest: Nearest,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectRequest {
    pub navmap: NavMap,
    pub state: Se2State,
    pub z_ref: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectResponse {
    pub pose: PoseDto,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CollideRequest {
    pub navmap: NavMap,
    pub pose: PoseDto,
    pub robot: RobotBox,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CollideResponse {
    pub report: CollisionReport,
}

// ---------------------------------------------------------------------------
// Evaluation and benchmarking
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRequest {
    pub template: SceneSpec,
    pub config: SweepConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResponse {
    pub table: SweepTable,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRequest {
    pub clouds: Vec<PointCloud>,
    pub ghpr: GhprParams,
    #[serde(default)]
    pub traversability: TravParams,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchResponse {
    pub stats: BenchStats,
}

// ---------------------------------------------------------------------------
// Sessions: buffered scans and the per-frame pipeline
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateSessionRequest {
    #[serde(default)]
    pub buffer: BufferParams,
    pub ghpr: GhprParams,
    #[serde(default)]
    pub traversability: TravParams,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateSessionResponse {
    pub session_id: Uuid,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PushScanRequest {
    pub cloud: PointCloud,
    pub pose: PoseDto,
    pub timestamp: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PushScanResponse {
    pub scans_buffered: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameRequest {
    /// Frame to assemble into, typically the latest scan pose; the session's
    /// viewpoint is interpreted relative to it.
    pub target: PoseDto,
    #[serde(default)]
    pub include_mesh: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameResponse {
    pub navmap: NavMap,
    pub mesh: Option<TriangleMesh>,
    pub face_labels: Option<Vec<FaceLabel>>,
    pub assembled_points: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SessionQueryNearest {
    pub query: Point3,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SessionQueryProject {
    pub state: Se2State,
    pub z_ref: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SessionQueryCollide {
    pub pose: PoseDto,
    pub robot: RobotBox,
}
