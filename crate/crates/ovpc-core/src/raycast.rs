//! Ray/mesh intersection helpers used for point-in-mesh and free-space
//! containment tests.

use crate::geom::{Point3, TriangleMesh, Vec3};

/// Möller–Trumbore ray/triangle intersection. Returns the ray parameter `t`
/// of the hit, or `None` if the ray misses (or runs parallel to) the triangle.
pub fn ray_triangle(origin: &Point3, dir: &Vec3, a: &Point3, b: &Point3, c: &Point3) -> Option<f64> {
    let e1 = b - a;
    let e2 = c - a;
    let pvec = dir.cross(&e2);
    let det = e1.dot(&pvec);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv_det = 1.0 / det;
    let tvec = origin - a;
    let u = tvec.dot(&pvec) * inv_det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let qvec = tvec.cross(&e1);
    let v = dir.dot(&qvec) * inv_det;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    Some(e2.dot(&qvec) * inv_det)
}

/// Number of mesh triangles crossed by the ray segment `origin + t*dir`,
/// `t in (t_min, t_max)`.
pub fn crossing_count(
    mesh: &TriangleMesh,
    origin: &Point3,
    dir: &Vec3,
    t_min: f64,
    t_max: f64,
) -> usize {
    mesh.faces
        .iter()
        .filter_map(|&[a, b, c]| {
            ray_triangle(
                origin,
                dir,
                &mesh.vertices[a],
                &mesh.vertices[b],
                &mesh.vertices[c],
            )
        })
        .filter(|&t| t > t_min && t < t_max)
        .count()
}

/// Distance along `dir` (assumed unit) from `origin` to the first mesh
/// crossing, if any.
pub fn first_hit_distance(mesh: &TriangleMesh, origin: &Point3, dir: &Vec3) -> Option<f64> {
    mesh.faces
        .iter()
        .filter_map(|&[a, b, c]| {
            ray_triangle(
                origin,
                dir,
                &mesh.vertices[a],
                &mesh.vertices[b],
                &mesh.vertices[c],
            )
        })
        .filter(|&t| t > 0.0)
        .min_by(|x, y| x.total_cmp(y))
}

/// Parity-based point-in-closed-mesh test: casts a ray in a fixed direction
/// and counts crossings; odd means inside.
pub fn is_inside(mesh: &TriangleMesh, q: &Point3) -> bool {
    // Slightly irrational direction to dodge shared-edge double counting on
    // grid-aligned meshes.
    let dir = Vec3::new(0.577_215_664_901, 0.318_309_886_18, 0.754_877_666_24).normalize();
    crossing_count(mesh, q, &dir, 0.0, f64::INFINITY) % 2 == 1
}
