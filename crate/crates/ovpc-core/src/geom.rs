//! Foundational geometric types shared by the whole pipeline: points, poses,
//! clouds, triangle meshes, and mesh topology checks.
//!
//! Coordinate convention: right-handed, z up, gravity along -z. All surface
//! angles elsewhere in the crate are measured against +z.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// 3D point in meters.
pub type Point3 = nalgebra::Point3<f64>;
/// 3D vector in meters (or unitless for directions/normals).
pub type Vec3 = nalgebra::Vector3<f64>;
/// Rigid transform: unit-quaternion rotation plus translation.
pub type Pose3 = nalgebra::Isometry3<f64>;
/// Unit quaternion rotation.
pub type UnitQuat = nalgebra::UnitQuaternion<f64>;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("point {index} is not finite: ({x}, {y}, {z})")]
    NonFinitePoint { index: usize, x: f64, y: f64, z: f64 },
    #[error("intensity has {intensity_len} entries but the cloud has {point_len} points")]
    IntensityMismatch {
        intensity_len: usize,
        point_len: usize,
    },
    #[error("face {face} references vertex {index} but the mesh has {vertex_count} vertices")]
    FaceIndexOutOfRange {
        face: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("face {face} repeats a vertex")]
    DegenerateFace { face: usize },
}

/// A set of 3D points with an optional parallel intensity channel.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Point3>,
    pub intensity: Option<Vec<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>, intensity: Option<Vec<f64>>) -> Result<Self, GeomError> {
        if let Some(ref i) = intensity {
            if i.len() != points.len() {
                return Err(GeomError::IntensityMismatch {
                    intensity_len: i.len(),
                    point_len: points.len(),
                });
            }
        }
        Ok(Self { points, intensity })
    }

    pub fn from_points(points: Vec<Point3>) -> Self {
        Self {
            points,
            intensity: None,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the first non-finite point, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.points.iter().position(|p| !point_is_finite(p))
    }
}

pub fn point_is_finite(p: &Point3) -> bool {
    p.x.is_finite() && p.y.is_finite() && p.z.is_finite()
}

/// Applies a rigid transform to every point of a cloud.
///
/// Intensity and ordering are preserved. Non-finite input points are rejected
/// with the offending index rather than silently propagated.
pub fn transform_cloud(cloud: &PointCloud, pose: &Pose3) -> Result<PointCloud, GeomError> {
    if let Some(index) = cloud.first_non_finite() {
        let p = cloud.points[index];
        return Err(GeomError::NonFinitePoint {
            index,
            x: p.x,
            y: p.y,
            z: p.z,
        });
    }
    Ok(PointCloud {
        points: cloud.points.iter().map(|p| pose * p).collect(),
        intensity: cloud.intensity.clone(),
    })
}

/// Indexed triangle mesh.
///
/// `face_normals` holds one unit normal per face. For hulls the normals face
/// outward; for lifted visibility meshes they face the viewpoint side (the
/// enclosed free space). `source_index` maps each vertex back to the index of
/// the point it came from in the originating cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleMesh {
    pub vertices: Vec<Point3>,
    pub faces: Vec<[usize; 3]>,
    pub face_normals: Vec<Vec3>,
    pub source_index: Vec<usize>,
}

impl TriangleMesh {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn face_centroid(&self, face: usize) -> Point3 {
        let [a, b, c] = self.faces[face];
        let v = (self.vertices[a].coords + self.vertices[b].coords + self.vertices[c].coords)
            / 3.0;
        Point3::from(v)
    }
}

/// Result of a watertightness check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyReport {
    /// True iff every edge borders exactly two faces.
    pub is_closed: bool,
    /// V - E + F.
    pub euler_characteristic: i64,
    pub boundary_edge_count: usize,
    pub nonmanifold_edge_count: usize,
}

/// Counts edge incidences over unordered vertex pairs and reports closure.
pub fn mesh_topology_check(mesh: &TriangleMesh) -> Result<TopologyReport, GeomError> {
    let nv = mesh.vertices.len();
    let mut edges: std::collections::HashMap<(usize, usize), usize> =
        std::collections::HashMap::with_capacity(mesh.faces.len() * 3 / 2);
    for (fi, face) in mesh.faces.iter().enumerate() {
        for k in 0..3 {
            let a = face[k];
            let b = face[(k + 1) % 3];
            if a >= nv || b >= nv {
                return Err(GeomError::FaceIndexOutOfRange {
                    face: fi,
                    index: a.max(b),
                    vertex_count: nv,
                });
            }
            if a == b {
                return Err(GeomError::DegenerateFace { face: fi });
            }
            let key = (a.min(b), a.max(b));
            *edges.entry(key).or_insert(0) += 1;
        }
    }
    let mut boundary = 0usize;
    let mut nonmanifold = 0usize;
    for &count in edges.values() {
        match count {
            1 => boundary += 1,
            2 => {}
            _ => nonmanifold += 1,
        }
    }
    let e = edges.len() as i64;
    Ok(TopologyReport {
        is_closed: boundary == 0 && nonmanifold == 0,
        euler_characteristic: nv as i64 - e + mesh.faces.len() as i64,
        boundary_edge_count: boundary,
        nonmanifold_edge_count: nonmanifold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn tetrahedron() -> TriangleMesh {
        let vertices = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
        ];
        let faces = vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]];
        let face_normals = faces
            .iter()
            .map(|&[a, b, c]| {
                (vertices[b] - vertices[a])
                    .cross(&(vertices[c] - vertices[a]))
                    .normalize()
            })
            .collect();
        TriangleMesh {
            vertices,
            faces,
            face_normals,
            source_index: vec![0, 1, 2, 3],
        }
    }

    #[test]
    fn identity_transform_is_identity() {
        let cloud = PointCloud::new(
            vec![Point3::new(1.0, 2.0, 3.0), Point3::new(-4.0, 0.5, 0.0)],
            Some(vec![0.1, 0.9]),
        )
        .unwrap();
        let out = transform_cloud(&cloud, &Pose3::identity()).unwrap();
        assert_eq!(out, cloud);
    }

    #[test]
    fn translation_moves_points() {
        let cloud = PointCloud::from_points(vec![Point3::origin()]);
        let pose = Pose3::translation(1.0, 0.0, 0.0);
        let out = transform_cloud(&cloud, &pose).unwrap();
        assert_eq!(out.points[0], Point3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn yaw_quarter_turn() {
        let cloud = PointCloud::from_points(vec![Point3::new(1.0, 0.0, 0.0)]);
        let pose = Pose3::from_parts(
            nalgebra::Translation3::identity(),
            UnitQuat::from_axis_angle(&Vec3::z_axis(), FRAC_PI_2),
        );
        let out = transform_cloud(&cloud, &pose).unwrap();
        let p = out.points[0];
        assert!((p.x - 0.0).abs() < 1e-12);
        assert!((p.y - 1.0).abs() < 1e-12);
        assert!(p.z.abs() < 1e-12);
    }

    #[test]
    fn non_finite_point_is_rejected_with_index() {
        let cloud = PointCloud::from_points(vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(f64::NAN, 0.0, 0.0),
        ]);
        match transform_cloud(&cloud, &Pose3::identity()) {
            Err(GeomError::NonFinitePoint { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected NonFinitePoint, got {other:?}"),
        }
    }

    #[test]
    fn intensity_length_mismatch() {
        assert!(PointCloud::new(vec![Point3::origin()], Some(vec![1.0, 2.0])).is_err());
    }

    #[test]
    fn tetrahedron_is_closed() {
        let report = mesh_topology_check(&tetrahedron()).unwrap();
        assert!(report.is_closed);
        assert_eq!(report.euler_characteristic, 2);
        assert_eq!(report.boundary_edge_count, 0);
        assert_eq!(report.nonmanifold_edge_count, 0);
    }

    #[test]
    fn tetrahedron_minus_face_has_boundary() {
        let mut mesh = tetrahedron();
        mesh.faces.pop();
        mesh.face_normals.pop();
        let report = mesh_topology_check(&mesh).unwrap();
        assert!(!report.is_closed);
        assert_eq!(report.boundary_edge_count, 3);
    }

    #[test]
    fn out_of_range_face_index_errors() {
        let mut mesh = tetrahedron();
        mesh.faces[0] = [0, 1, 9];
        assert!(matches!(
            mesh_topology_check(&mesh),
            Err(GeomError::FaceIndexOutOfRange { .. })
        ));
    }

    #[test]
    fn transform_round_trip_is_identity() {
        let cloud = PointCloud::from_points(vec![
            Point3::new(1.0, 2.0, 3.0),
            Point3::new(-0.3, 4.0, -2.5),
            Point3::new(10.0, -7.0, 0.01),
        ]);
        let pose = Pose3::from_parts(
            nalgebra::Translation3::new(0.4, -1.2, 2.0),
            UnitQuat::from_euler_angles(0.3, -0.2, 1.1),
        );
        let there = transform_cloud(&cloud, &pose).unwrap();
        let back = transform_cloud(&there, &pose.inverse()).unwrap();
        for (a, b) in cloud.points.iter().zip(back.points.iter()) {
            assert!((a - b).norm() < 1e-9);
        }
    }
}
