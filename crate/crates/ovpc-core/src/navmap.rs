//! Queryable navigation map: classified points with normals plus the three
//! map-side queries a local planner needs — nearest visible point, SE(2)
//! state projection onto the surface, and oriented-box collision checks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Point3, Pose3, UnitQuat, Vec3};
use crate::spatial::KdTree;

#[derive(Debug, Error)]
pub enum NavMapError {
    #[error("navigation map is empty")]
    EmptyMap,
    #[error("heading projects to zero norm on the surface plane (vertical-normal degeneracy)")]
    DegenerateHeading,
    #[error("invalid map data: {0}")]
    InvalidData(String),
}

/// Classified visible-point map. Immutable after construction; queries are
/// safe to run concurrently.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "NavMapData", into = "NavMapData")]
pub struct NavMap {
    points: Vec<Point3>,
    normals: Vec<Vec3>,
    traversable: Vec<bool>,
    source_index: Vec<usize>,
    viewpoint: Point3,
    #[allow(clippy::struct_field_names)]
    index: KdTree,
}

/// Flat serialized form of a [`NavMap`]; the spatial index is rebuilt on
/// deserialization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NavMapData {
    pub points: Vec<Point3>,
    pub normals: Vec<Vec3>,
    pub traversable: Vec<bool>,
    #[serde(default)]
    pub source_index: Vec<usize>,
    pub viewpoint: Point3,
}

impl From<NavMap> for NavMapData {
    fn from(map: NavMap) -> Self {
        NavMapData {
            points: map.points,
            normals: map.normals,
            traversable: map.traversable,
            source_index: map.source_index,
            viewpoint: map.viewpoint,
        }
    }
}

impl TryFrom<NavMapData> for NavMap {
    type Error = NavMapError;

    fn try_from(data: NavMapData) -> Result<Self, NavMapError> {
        if data.normals.len() != data.points.len() || data.traversable.len() != data.points.len() {
            return Err(NavMapError::InvalidData(format!(
                "{} points, {} normals, {} flags",
                data.points.len(),
                data.normals.len(),
                data.traversable.len()
            )));
        }
        let source_index = if data.source_index.is_empty() {
            (0..data.points.len()).collect()
        } else if data.source_index.len() == data.points.len() {
            data.source_index
        } else {
            return Err(NavMapError::InvalidData(
                "source_index length mismatch".into(),
            ));
        };
        Ok(NavMap::new(
            data.points,
            data.normals,
            data.traversable,
            source_index,
            data.viewpoint,
        ))
    }
}

impl NavMap {
    pub fn new(
        points: Vec<Point3>,
        normals: Vec<Vec3>,
        traversable: Vec<bool>,
        source_index: Vec<usize>,
        viewpoint: Point3,
    ) -> Self {
        debug_assert_eq!(points.len(), normals.len());
        debug_assert_eq!(points.len(), traversable.len());
        debug_assert!(normals.iter().all(|n| (n.norm() - 1.0).abs() < 1e-6));
        let index = KdTree::build(&points);
        Self {
            points,
            normals,
            traversable,
            source_index,
            viewpoint,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn traversable(&self) -> &[bool] {
        &self.traversable
    }

    /// Index of each map point in the cloud the mesh was built from.
    pub fn source_index(&self) -> &[usize] {
        &self.source_index
    }

    pub fn viewpoint(&self) -> Point3 {
        self.viewpoint
    }
}

/// Nearest-point query result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nearest {
    pub index: usize,
    pub point: Point3,
    pub normal: Vec3,
    pub traversable: bool,
    pub distance: f64,
}

/// Euclidean nearest map point to `q`; ties break toward the lowest index.
pub fn nearest_visible(map: &NavMap, q: &Point3) -> Result<Nearest, NavMapError> {
    let (index, d2) = map.index.nearest(q).ok_or(NavMapError::EmptyMap)?;
    Ok(Nearest {
        index,
        point: map.points[index],
        normal: map.normals[index],
        traversable: map.traversable[index],
        distance: d2.sqrt(),
    })
}

/// Planar robot state used for projection queries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Se2State {
    pub x: f64,
    pub y: f64,
    /// Radians, normalized to (-pi, pi].
    pub heading: f64,
}

impl Se2State {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: normalize_angle(heading),
        }
    }
}

pub fn normalize_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut r = a % two_pi;
    if r <= -std::f64::consts::PI {
        r += two_pi;
    } else if r > std::f64::consts::PI {
        r -= two_pi;
    }
    r
}

/// Projects an SE(2) state onto the map surface.
///
/// The returned pose sits on the nearest map point to `(x, y, z_ref)`, with
/// body-z along the surface normal and body-x along the heading direction
/// projected onto the surface plane (heading is preserved up to that
/// projection).
pub fn project_state(map: &NavMap, s: &Se2State, z_ref: f64) -> Result<Pose3, NavMapError> {
    let near = nearest_visible(map, &Point3::new(s.x, s.y, z_ref))?;
    let n = near.normal;
    let heading = Vec3::new(s.heading.cos(), s.heading.sin(), 0.0);
    let in_plane = heading - n * heading.dot(&n);
    let norm = in_plane.norm();
    if norm < 1e-9 {
        return Err(NavMapError::DegenerateHeading);
    }
    let x_axis = in_plane / norm;
    let y_axis = n.cross(&x_axis);
    let rot = nalgebra::Rotation3::from_matrix_unchecked(nalgebra::Matrix3::from_columns(&[
        x_axis, y_axis, n,
    ]));
    let quat = UnitQuat::from_rotation_matrix(&rot);
    Ok(Pose3::from_parts(near.point.coords.into(), quat))
}

/// Axis-aligned (in the body frame) collision volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotBox {
    pub length: f64,
    pub width: f64,
    pub height: f64,
    /// Box bottom relative to the pose origin (the projected surface point).
    pub z_offset: f64,
}

impl RobotBox {
    pub fn validate(&self) -> Result<(), NavMapError> {
        if !(self.length > 0.0 && self.width > 0.0 && self.height > 0.0) {
            return Err(NavMapError::InvalidData(format!(
                "box extents must be positive: {} x {} x {}",
                self.length, self.width, self.height
            )));
        }
        Ok(())
    }

    /// True iff `p` (already in the box frame) lies inside.
    fn contains_local(&self, p: &Point3) -> bool {
        p.x >= -self.length / 2.0
            && p.x <= self.length / 2.0
            && p.y >= -self.width / 2.0
            && p.y <= self.width / 2.0
            && p.z >= self.z_offset
            && p.z <= self.z_offset + self.height
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub in_collision: bool,
    /// Map indices of non-traversable points inside the box, ascending.
    pub offending_indices: Vec<usize>,
}

/// Checks the pose-aligned box against all non-traversable map points.
///
/// Traversable points are the drivable support surface and never collide.
pub fn collision_check(
    map: &NavMap,
    pose: &Pose3,
    robot: &RobotBox,
) -> Result<CollisionReport, NavMapError> {
    robot.validate()?;
    // World-space AABB of the oriented box to prefilter with the index.
    let half = Vec3::new(robot.length / 2.0, robot.width / 2.0, robot.height / 2.0);
    let center_local = Point3::new(0.0, 0.0, robot.z_offset + robot.height / 2.0);
    let center_world = pose * center_local;
    let rot = pose.rotation.to_rotation_matrix();
    let m = rot.matrix();
    let mut extent = Vec3::zeros();
    for r in 0..3 {
        extent[r] = (0..3).map(|c| m[(r, c)].abs() * half[c]).sum();
    }
    let lo = center_world - extent;
    let hi = center_world + extent;
    let inv = pose.inverse();
    let mut offending: Vec<usize> = map
        .index
        .within_box(&lo, &hi)
        .into_iter()
        .filter(|&i| !map.traversable[i] && robot.contains_local(&(inv * map.points[i])))
        .collect();
    offending.sort_unstable();
    Ok(CollisionReport {
        in_collision: !offending.is_empty(),
        offending_indices: offending,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_map(nx: usize, ny: usize, spacing: f64) -> NavMap {
        let mut points = Vec::new();
        for i in 0..nx {
            for j in 0..ny {
                points.push(Point3::new(i as f64 * spacing, j as f64 * spacing, 0.0));
            }
        }
        let n = points.len();
        NavMap::new(
            points,
            vec![Vec3::z(); n],
            vec![true; n],
            (0..n).collect(),
            Point3::new(0.0, 0.0, 1.88),
        )
    }

    #[test]
    fn nearest_at_map_point_is_exact() {
        let map = flat_map(5, 5, 1.0);
        let near = nearest_visible(&map, &Point3::new(2.0, 3.0, 0.0)).unwrap();
        assert_eq!(near.point, Point3::new(2.0, 3.0, 0.0));
        assert_eq!(near.distance, 0.0);
    }

    #[test]
    fn nearest_tie_breaks_low_index() {
        let points = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
            Point3::new(1.0, -1.0, 0.0),
        ];
        let n = points.len();
        let map = NavMap::new(
            points,
            vec![Vec3::z(); n],
            vec![true; n],
            (0..n).collect(),
            Point3::origin(),
        );
        // (1, 0) is equidistant from all four points.
        let near = nearest_visible(&map, &Point3::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(near.index, 0);
    }

    #[test]
    fn empty_map_errors() {
        let map = NavMap::new(vec![], vec![], vec![], vec![], Point3::origin());
        assert!(matches!(
            nearest_visible(&map, &Point3::origin()),
            Err(NavMapError::EmptyMap)
        ));
    }

    #[test]
    fn project_on_flat_ground_preserves_heading() {
        let map = flat_map(10, 10, 0.5);
        let s = Se2State::new(1.0, 2.0, 30.0_f64.to_radians());
        let pose = project_state(&map, &s, 0.0).unwrap();
        let x_axis = pose.rotation * Vec3::x();
        assert!((x_axis.z).abs() < 1e-12);
        let yaw = x_axis.y.atan2(x_axis.x);
        assert!((yaw - 30.0_f64.to_radians()).abs() < 1e-12);
        let z_axis = pose.rotation * Vec3::z();
        assert!((z_axis - Vec3::z()).norm() < 1e-12);
    }

    #[test]
    fn project_on_incline_tilts_body_x() {
        // Single point with a 10-degree incline normal; heading upslope.
        let alpha = 10.0_f64.to_radians();
        let normal = Vec3::new(-alpha.sin(), 0.0, alpha.cos());
        let map = NavMap::new(
            vec![Point3::new(1.0, 0.0, 0.3)],
            vec![normal],
            vec![true],
            vec![0],
            Point3::origin(),
        );
        let pose = project_state(&map, &Se2State::new(1.0, 0.0, 0.0), 0.0).unwrap();
        let x_axis = pose.rotation * Vec3::x();
        assert!((x_axis.z - alpha.sin()).abs() < 1e-6);
        // Orthonormal with determinant +1.
        let m = pose.rotation.to_rotation_matrix();
        let gram = m.matrix().transpose() * m.matrix();
        assert!((gram - nalgebra::Matrix3::identity()).norm() < 1e-9);
        assert!((m.matrix().determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn vertical_surface_aligned_heading_degenerates() {
        let map = NavMap::new(
            vec![Point3::origin()],
            vec![Vec3::x()],
            vec![true],
            vec![0],
            Point3::origin(),
        );
        // Heading along +x, normal along +x: projection vanishes.
        assert!(matches!(
            project_state(&map, &Se2State::new(0.0, 0.0, 0.0), 0.0),
            Err(NavMapError::DegenerateHeading)
        ));
    }

    #[test]
    fn traversable_ground_never_collides() {
        let map = flat_map(10, 10, 0.2);
        let pose = Pose3::translation(1.0, 1.0, 0.0);
        let robot = RobotBox {
            length: 1.0,
            width: 0.8,
            height: 0.5,
            z_offset: -0.1,
        };
        let report = collision_check(&map, &pose, &robot).unwrap();
        assert!(!report.in_collision);
        assert!(report.offending_indices.is_empty());
    }

    #[test]
    fn non_traversable_point_in_box_collides() {
        let points = vec![Point3::new(0.0, 0.0, 0.2), Point3::new(5.0, 5.0, 0.0)];
        let map = NavMap::new(
            points,
            vec![Vec3::z(); 2],
            vec![false, true],
            vec![0, 1],
            Point3::origin(),
        );
        let robot = RobotBox {
            length: 1.0,
            width: 1.0,
            height: 1.0,
            z_offset: 0.0,
        };
        let report = collision_check(&map, &Pose3::identity(), &robot).unwrap();
        assert!(report.in_collision);
        assert_eq!(report.offending_indices, vec![0]);
    }

    #[test]
    fn point_just_outside_box_face_is_free() {
        let points = vec![Point3::new(0.501, 0.0, 0.2)];
        let map = NavMap::new(
            points,
            vec![Vec3::z()],
            vec![false],
            vec![0],
            Point3::origin(),
        );
        let robot = RobotBox {
            length: 1.0,
            width: 1.0,
            height: 1.0,
            z_offset: 0.0,
        };
        let report = collision_check(&map, &Pose3::identity(), &robot).unwrap();
        assert!(!report.in_collision);
    }

    #[test]
    fn angle_normalization_covers_the_wraparound() {
        assert!((normalize_angle(std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        assert!((normalize_angle(-std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        assert!((normalize_angle(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        assert!(normalize_angle(0.1).abs() - 0.1 < 1e-12);
    }
}
