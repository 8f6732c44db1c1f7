//! Hidden point removal and the lift of image-space hull connectivity back to
//! original coordinates.
//!
//! Points are mapped through the radial kernel `F(d) = d^gamma` (gamma < 0)
//! about the viewpoint, which inverts distances so that near points image far.
//! A point is visible exactly when its image lies on the convex hull of the
//! image set. Copying the hull's face structure onto the original coordinates
//! of the visible points yields a closed triangle mesh bounding the local
//! free space.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Point3, PointCloud, TriangleMesh};
use crate::hull::{quickhull3, HullConfig, HullError, HullMesh};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GhprConfig {
    pub viewpoint: Point3,
    /// Kernel exponent, strictly negative. Values in [-0.03, -0.01] work well
    /// for vehicle-scale clouds; closer to zero makes more points visible.
    pub gamma: f64,
    /// Points closer than this to the viewpoint are dropped (sensor
    /// self-returns), not treated as errors.
    pub min_range: f64,
    #[serde(default)]
    pub hull: HullConfigSerde,
}

/// Serializable mirror of [`HullConfig`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HullConfigSerde {
    pub epsilon_scale: f64,
}

impl Default for HullConfigSerde {
    fn default() -> Self {
        Self {
            epsilon_scale: HullConfig::default().epsilon_scale,
        }
    }
}

impl GhprConfig {
    pub const DEFAULT_GAMMA: f64 = -0.03;
    pub const DEFAULT_MIN_RANGE: f64 = 1e-6;

    pub fn at(viewpoint: Point3) -> Self {
        Self {
            viewpoint,
            gamma: Self::DEFAULT_GAMMA,
            min_range: Self::DEFAULT_MIN_RANGE,
            hull: HullConfigSerde::default(),
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn validate(&self) -> Result<(), GhprError> {
        if !(self.gamma < 0.0) {
            return Err(GhprError::InvalidConfig(format!(
                "gamma must be negative, got {}",
                self.gamma
            )));
        }
        if !(self.min_range > 0.0) {
            return Err(GhprError::InvalidConfig(format!(
                "min_range must be positive, got {}",
                self.min_range
            )));
        }
        if !crate::geom::point_is_finite(&self.viewpoint) {
            return Err(GhprError::InvalidConfig("viewpoint must be finite".into()));
        }
        Ok(())
    }

    fn hull_config(&self, classify_grazing: bool) -> HullConfig {
        HullConfig {
            epsilon_scale: self.hull.epsilon_scale,
            classify_grazing,
        }
    }
}

#[derive(Debug, Error)]
pub enum GhprError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("kernel domain error: distance must be positive, got {d}")]
    KernelDomain { d: f64 },
    #[error("too few usable points: {got} after range filtering, need at least 4")]
    TooFewPoints { got: usize },
    #[error(transparent)]
    Hull(#[from] HullError),
}

/// Radial kernel `F(d) = d^gamma`. Strictly decreasing in `d` for `gamma < 0`
/// and `F(1) = 1` for any exponent.
pub fn kernel_value(d: f64, gamma: f64) -> Result<f64, GhprError> {
    if !(d > 0.0) {
        return Err(GhprError::KernelDomain { d });
    }
    Ok(d.powf(gamma))
}

/// Visibility classification of a cloud from a viewpoint.
#[derive(Debug, Clone)]
pub struct VisibleResult {
    /// Indices into the input cloud whose image lies on the hull, ascending.
    pub visible_indices: Vec<usize>,
    /// Kernel-transformed points (one per usable input point).
    pub image_cloud: PointCloud,
    /// Convex hull over the image cloud.
    pub hull: HullMesh,
    /// Input index of each image point.
    pub kept: Vec<usize>,
    /// Points dropped for being within `min_range` of the viewpoint.
    pub dropped_near: usize,
}

/// Classifies cloud points as visible/hidden from `config.viewpoint`.
///
/// The viewpoint itself is never added to the hull input: with an inverting
/// kernel the image hull already wraps the image of the viewpoint whenever
/// the cloud has directional coverage, and adding it would puncture closure.
pub fn ghpr_visible(cloud: &PointCloud, config: &GhprConfig) -> Result<VisibleResult, GhprError> {
    ghpr_visible_impl(cloud, config, true)
}

fn ghpr_visible_impl(
    cloud: &PointCloud,
    config: &GhprConfig,
    classify_grazing: bool,
) -> Result<VisibleResult, GhprError> {
    config.validate()?;
    let v = config.viewpoint;
    let mut kept = Vec::with_capacity(cloud.len());
    let mut images = Vec::with_capacity(cloud.len());
    let mut dropped_near = 0usize;
    for (i, p) in cloud.points.iter().enumerate() {
        let offset = p - v;
        let d = offset.norm();
        if d < config.min_range {
            dropped_near += 1;
            continue;
        }
        // v + F(d) * offset / d, with F(d) = d^gamma.
        let scale = d.powf(config.gamma - 1.0);
        images.push(v + offset * scale);
        kept.push(i);
    }
    if images.len() < 4 {
        return Err(GhprError::TooFewPoints { got: images.len() });
    }
    let hull = quickhull3(&images, &config.hull_config(classify_grazing))?;
    let visible_indices: Vec<usize> = hull
        .vertex_on_hull
        .iter()
        .enumerate()
        .filter(|(_, &on)| on)
        .map(|(img_idx, _)| kept[img_idx])
        .collect();
    Ok(VisibleResult {
        visible_indices,
        image_cloud: PointCloud::from_points(images),
        hull,
        kept,
        dropped_near,
    })
}

/// Builds the watertight free-space mesh over the visible points of `cloud`.
///
/// Vertices are the original coordinates of the hull's triangulation
/// vertices; faces copy the image-hull connectivity. Face normals are
/// recomputed in original space and oriented toward the viewpoint side (the
/// inversion scrambles image-space winding near grazing angles, so the
/// orientation cannot be inherited).
pub fn build_ovpc_mesh(cloud: &PointCloud, config: &GhprConfig) -> Result<TriangleMesh, GhprError> {
    // The mesh only uses triangulation vertices, so the grazing-point scan
    // (a completeness refinement of `visible_indices`) is skipped here.
    let visible = ghpr_visible_impl(cloud, config, false)?;
    Ok(lift_hull_to_original(cloud, config, &visible))
}

/// Lift of a precomputed visibility result; see [`build_ovpc_mesh`].
pub fn lift_hull_to_original(
    cloud: &PointCloud,
    config: &GhprConfig,
    visible: &VisibleResult,
) -> TriangleMesh {
    let hull_mesh = &visible.hull.mesh;
    let source_index: Vec<usize> = hull_mesh
        .source_index
        .iter()
        .map(|&img_idx| visible.kept[img_idx])
        .collect();
    let vertices: Vec<Point3> = source_index.iter().map(|&i| cloud.points[i]).collect();
    let v = config.viewpoint;

    let mut faces = Vec::with_capacity(hull_mesh.faces.len());
    let mut face_normals = Vec::with_capacity(hull_mesh.faces.len());
    for &[a, b, c] in &hull_mesh.faces {
        let (pa, pb, pc) = (vertices[a], vertices[b], vertices[c]);
        let centroid = Point3::from((pa.coords + pb.coords + pc.coords) / 3.0);
        let cross = (pb - pa).cross(&(pc - pa));
        let norm = cross.norm();
        let mut normal = if norm > 0.0 {
            cross / norm
        } else {
            // Degenerate lift (collinear originals); fall back to the
            // viewpoint direction, which satisfies the orientation rule.
            (v - centroid).normalize()
        };
        let mut face = [a, b, c];
        if normal.dot(&(v - centroid)) < 0.0 {
            normal = -normal;
            face.swap(1, 2);
        }
        faces.push(face);
        face_normals.push(normal);
    }
    TriangleMesh {
        vertices,
        faces,
        face_normals,
        source_index,
    }
}
