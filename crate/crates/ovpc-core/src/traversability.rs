//! Face and vertex traversability classification over a free-space mesh.
//!
//! A face is traversable when its viewpoint-facing normal is within
//! `alpha_max` of the world up axis and the height spread of its vertices is
//! at most `dh_max`. A vertex is traversable only when every incident face is.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Point3, TriangleMesh, Vec3};
use crate::navmap::NavMap;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TraversabilityConfig {
    /// Maximum surface angle against +z, radians.
    pub alpha_max: f64,
    /// Maximum per-face vertex height difference, meters.
    pub dh_max: f64,
}

impl Default for TraversabilityConfig {
    fn default() -> Self {
        Self {
            alpha_max: 30.0_f64.to_radians(),
            dh_max: 0.25,
        }
    }
}

impl TraversabilityConfig {
    pub fn validate(&self) -> Result<(), TravError> {
        if !(self.alpha_max > 0.0 && self.alpha_max <= std::f64::consts::FRAC_PI_2) {
            return Err(TravError::InvalidConfig(format!(
                "alpha_max must be in (0, pi/2], got {}",
                self.alpha_max
            )));
        }
        if !(self.dh_max > 0.0) {
            return Err(TravError::InvalidConfig(format!(
                "dh_max must be positive, got {}",
                self.dh_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum TravError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("face {face} normal has norm {norm}, expected unit within 1e-6")]
    NonUnitNormal { face: usize, norm: f64 },
    #[error("{labels} labels for {faces} faces")]
    LabelCountMismatch { labels: usize, faces: usize },
    #[error("vertex {vertex} has no incident face")]
    IsolatedVertex { vertex: usize },
    #[error("vertex {vertex} has a zero mean normal")]
    ZeroMeanNormal { vertex: usize },
}

/// Per-face classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceLabel {
    pub traversable: bool,
    /// Angle between the oriented face normal and +z, radians, in [0, pi].
    pub surface_angle: f64,
}

/// Classifies every face of `mesh`.
///
/// Requires oriented (viewpoint-facing) unit normals: downward-facing faces
/// such as the undersides of overhangs then come out at angles above pi/2 and
/// are never traversable.
pub fn face_labels(
    mesh: &TriangleMesh,
    cfg: &TraversabilityConfig,
) -> Result<Vec<FaceLabel>, TravError> {
    cfg.validate()?;
    let mut labels = Vec::with_capacity(mesh.faces.len());
    for (fi, (face, normal)) in mesh.faces.iter().zip(mesh.face_normals.iter()).enumerate() {
        let norm = normal.norm();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(TravError::NonUnitNormal { face: fi, norm });
        }
        let surface_angle = normal.z.clamp(-1.0, 1.0).acos();
        let zs = face.map(|v| mesh.vertices[v].z);
        let spread = zs.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
            - zs.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        labels.push(FaceLabel {
            traversable: surface_angle <= cfg.alpha_max && spread <= cfg.dh_max,
            surface_angle,
        });
    }
    Ok(labels)
}

/// Per-vertex normals (mean of incident face normals, renormalized) and
/// traversability flags (AND over incident faces).
pub fn vertex_attributes(
    mesh: &TriangleMesh,
    labels: &[FaceLabel],
) -> Result<(Vec<Vec3>, Vec<bool>), TravError> {
    if labels.len() != mesh.faces.len() {
        return Err(TravError::LabelCountMismatch {
            labels: labels.len(),
            faces: mesh.faces.len(),
        });
    }
    let nv = mesh.vertices.len();
    let mut sums = vec![Vec3::zeros(); nv];
    let mut counts = vec![0usize; nv];
    let mut traversable = vec![true; nv];
    for (face, (normal, label)) in mesh
        .faces
        .iter()
        .zip(mesh.face_normals.iter().zip(labels.iter()))
    {
        for &v in face {
            sums[v] += normal;
            counts[v] += 1;
            traversable[v] &= label.traversable;
        }
    }
    let mut normals = Vec::with_capacity(nv);
    for (v, (sum, count)) in sums.into_iter().zip(counts.into_iter()).enumerate() {
        if count == 0 {
            return Err(TravError::IsolatedVertex { vertex: v });
        }
        let norm = sum.norm();
        if norm < 1e-12 {
            return Err(TravError::ZeroMeanNormal { vertex: v });
        }
        normals.push(sum / norm);
    }
    Ok((normals, traversable))
}

/// Classifies `mesh` and packages its vertices as a queryable navigation map.
///
/// `viewpoint` is recorded on the map; the mesh itself does not carry it.
pub fn build_navmap(
    mesh: &TriangleMesh,
    cfg: &TraversabilityConfig,
    viewpoint: Point3,
) -> Result<NavMap, TravError> {
    let labels = face_labels(mesh, cfg)?;
    let (normals, traversable) = vertex_attributes(mesh, &labels)?;
    Ok(NavMap::new(
        mesh.vertices.clone(),
        normals,
        traversable,
        mesh.source_index.clone(),
        viewpoint,
    ))
}
