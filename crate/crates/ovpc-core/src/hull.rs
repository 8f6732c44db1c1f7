//! Robust 3D convex hull (quickhull) with a magnitude-scaled tolerance.
//!
//! The tolerance is `epsilon_scale * max |coordinate|`: the radially
//! transformed point sets this hull is fed span orders of magnitude, so a
//! fixed absolute tolerance would either miss grazing points or swallow real
//! structure. Construction is deterministic for a fixed input ordering: the
//! initial simplex picks axis-extreme points tie-broken by lowest index, and
//! the expansion always processes the globally farthest conflict point.

use std::collections::BinaryHeap;
use std::collections::HashMap;

use thiserror::Error;

use crate::geom::{mesh_topology_check, Point3, TriangleMesh, Vec3};

#[derive(Debug, Clone, Copy)]
pub struct HullConfig {
    /// Tolerance relative to the largest absolute input coordinate.
    pub epsilon_scale: f64,
    /// Also mark non-vertex points lying within tolerance of a face plane in
    /// `vertex_on_hull`. Costs an extra scan over interior points; turn it
    /// off when only the triangulation matters.
    pub classify_grazing: bool,
}

impl Default for HullConfig {
    fn default() -> Self {
        Self {
            epsilon_scale: 1e-10,
            classify_grazing: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum HullError {
    #[error("convex hull needs at least 4 points, got {got}")]
    TooFewPoints { got: usize },
    #[error("degenerate input: points span dimension {dimension} within tolerance {tolerance:e}")]
    Degenerate { dimension: usize, tolerance: f64 },
    #[error("hull mesh is not closed")]
    NotClosed,
    #[error("hull construction failed: {0}")]
    Internal(String),
}

/// Triangulated convex hull plus the on-hull classification of every input
/// point.
///
/// `mesh.source_index` maps each hull vertex back to its input index; face
/// normals point outward. `vertex_on_hull` additionally marks points that lie
/// within tolerance of a face plane without being part of the triangulation
/// (grazing/coplanar points).
#[derive(Debug, Clone)]
pub struct HullMesh {
    pub mesh: TriangleMesh,
    pub vertex_on_hull: Vec<bool>,
    pub epsilon: f64,
}

/// True iff `q` is within `eps` of the non-positive side of every face plane.
pub fn hull_contains(hull: &HullMesh, q: &Point3, eps: f64) -> Result<bool, HullError> {
    let report = mesh_topology_check(&hull.mesh)
        .map_err(|e| HullError::Internal(format!("invalid hull mesh: {e}")))?;
    if !report.is_closed {
        return Err(HullError::NotClosed);
    }
    for (face, normal) in hull.mesh.faces.iter().zip(hull.mesh.face_normals.iter()) {
        let c = (hull.mesh.vertices[face[0]].coords
            + hull.mesh.vertices[face[1]].coords
            + hull.mesh.vertices[face[2]].coords)
            / 3.0;
        if normal.dot(&(q.coords - c)) > eps {
            return Ok(false);
        }
    }
    Ok(true)
}

struct Face {
    v: [usize; 3],
    normal: Vec3,
    offset: f64,
    /// Neighbor face across edge (v[k], v[k+1]).
    adj: [usize; 3],
    conflicts: Vec<(usize, f64)>,
    alive: bool,
}

impl Face {
    fn dist(&self, p: &Point3) -> f64 {
        self.normal.dot(&p.coords) - self.offset
    }

    /// Farthest conflict point; ties broken toward the lowest point index by
    /// construction (conflicts are pushed in ascending index order and the
    /// comparison is strict).
    fn best(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for &(i, d) in &self.conflicts {
            if best.map_or(true, |(_, bd)| d > bd) {
                best = Some((i, d));
            }
        }
        best
    }
}

struct HeapEntry {
    dist: f64,
    face: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then_with(|| other.face.cmp(&self.face))
    }
}

struct Builder<'a> {
    points: &'a [Point3],
    eps: f64,
    faces: Vec<Face>,
    heap: BinaryHeap<HeapEntry>,
    /// Fixed interior reference point (centroid of the initial simplex).
    interior: Point3,
}

/// Computes the triangulated convex hull of `points`.
///
/// Errors on fewer than 4 points and on inputs that are coincident, collinear,
/// or coplanar within tolerance.
pub fn quickhull3(points: &[Point3], config: &HullConfig) -> Result<HullMesh, HullError> {
    if points.len() < 4 {
        return Err(HullError::TooFewPoints { got: points.len() });
    }
    let scale = points
        .iter()
        .flat_map(|p| [p.x.abs(), p.y.abs(), p.z.abs()])
        .fold(0.0f64, f64::max);
    let eps = config.epsilon_scale * scale;

    let mut builder = Builder {
        points,
        eps,
        faces: Vec::new(),
        heap: BinaryHeap::new(),
        interior: Point3::origin(),
    };
    let simplex = builder.initial_simplex()?;
    builder.build_simplex(simplex)?;
    builder.expand()?;
    builder.finish(config.classify_grazing)
}

impl<'a> Builder<'a> {
    fn initial_simplex(&self) -> Result<[usize; 4], HullError> {
        let points = self.points;
        // Axis-extreme points, lowest index on ties.
        let mut min_idx = [0usize; 3];
        let mut max_idx = [0usize; 3];
        for (i, p) in points.iter().enumerate().skip(1) {
            for a in 0..3 {
                if p[a] < points[min_idx[a]][a] {
                    min_idx[a] = i;
                }
                if p[a] > points[max_idx[a]][a] {
                    max_idx[a] = i;
                }
            }
        }
        let mut candidates: Vec<usize> = Vec::with_capacity(6);
        for i in min_idx.iter().chain(max_idx.iter()) {
            if !candidates.contains(i) {
                candidates.push(*i);
            }
        }
        candidates.sort_unstable();

        // Farthest candidate pair.
        let (mut p0, mut p1, mut best_d2) = (0usize, 0usize, 0.0f64);
        for (k, &i) in candidates.iter().enumerate() {
            for &j in candidates.iter().skip(k + 1) {
                let d2 = (points[i] - points[j]).norm_squared();
                if d2 > best_d2 {
                    best_d2 = d2;
                    p0 = i;
                    p1 = j;
                }
            }
        }
        if best_d2 <= self.eps * self.eps {
            return Err(HullError::Degenerate {
                dimension: 0,
                tolerance: self.eps,
            });
        }

        // Point farthest from the line (p0, p1).
        let dir = (points[p1] - points[p0]).normalize();
        let (mut p2, mut best_line) = (p0, 0.0f64);
        for (i, p) in points.iter().enumerate() {
            let d2 = (p - points[p0]).cross(&dir).norm_squared();
            if d2 > best_line {
                best_line = d2;
                p2 = i;
            }
        }
        if best_line <= self.eps * self.eps {
            return Err(HullError::Degenerate {
                dimension: 1,
                tolerance: self.eps,
            });
        }

        // Point farthest from the plane (p0, p1, p2).
        let n = (points[p1] - points[p0])
            .cross(&(points[p2] - points[p0]))
            .normalize();
        let (mut p3, mut best_plane) = (p0, 0.0f64);
        for (i, p) in points.iter().enumerate() {
            let d = n.dot(&(p - points[p0])).abs();
            if d > best_plane {
                best_plane = d;
                p3 = i;
            }
        }
        if best_plane <= self.eps {
            return Err(HullError::Degenerate {
                dimension: 2,
                tolerance: self.eps,
            });
        }
        Ok([p0, p1, p2, p3])
    }

    fn build_simplex(&mut self, simplex: [usize; 4]) -> Result<(), HullError> {
        let centroid = (self.points[simplex[0]].coords
            + self.points[simplex[1]].coords
            + self.points[simplex[2]].coords
            + self.points[simplex[3]].coords)
            / 4.0;
        self.interior = Point3::from(centroid);

        for skip in 0..4 {
            let mut v = [0usize; 3];
            let mut k = 0;
            for (j, &idx) in simplex.iter().enumerate() {
                if j != skip {
                    v[k] = idx;
                    k += 1;
                }
            }
            self.push_face(v)?;
        }
        self.link_all_new(&[0, 1, 2, 3])?;

        // Initial conflict assignment, ascending point index.
        let in_simplex = |i: usize| simplex.contains(&i);
        for i in 0..self.points.len() {
            if in_simplex(i) {
                continue;
            }
            self.assign_conflict(i, &[0, 1, 2, 3]);
        }
        for f in 0..4 {
            self.push_heap(f);
        }
        Ok(())
    }

    /// Creates a face over `v`, oriented so the interior reference point lies
    /// below its plane. Returns its id.
    fn push_face(&mut self, mut v: [usize; 3]) -> Result<usize, HullError> {
        let (a, b, c) = (self.points[v[0]], self.points[v[1]], self.points[v[2]]);
        let cross = (b - a).cross(&(c - a));
        let norm = cross.norm();
        if norm == 0.0 {
            return Err(HullError::Internal(format!(
                "zero-area face over points {v:?}"
            )));
        }
        let mut normal = cross / norm;
        let centroid = (a.coords + b.coords + c.coords) / 3.0;
        let mut offset = normal.dot(&centroid);
        if normal.dot(&self.interior.coords) - offset > 0.0 {
            normal = -normal;
            offset = -offset;
            v.swap(1, 2);
        }
        self.faces.push(Face {
            v,
            normal,
            offset,
            adj: [usize::MAX; 3],
            conflicts: Vec::new(),
            alive: true,
        });
        Ok(self.faces.len() - 1)
    }

    /// Links adjacency among `ids` by matching unordered edges. Every slot of
    /// every listed face must find its partner within the same set.
    fn link_all_new(&mut self, ids: &[usize]) -> Result<(), HullError> {
        let mut open: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for &f in ids {
            for k in 0..3 {
                let a = self.faces[f].v[k];
                let b = self.faces[f].v[(k + 1) % 3];
                let key = (a.min(b), a.max(b));
                match open.remove(&key) {
                    Some((g, slot)) => {
                        self.faces[f].adj[k] = g;
                        self.faces[g].adj[slot] = f;
                    }
                    None => {
                        if open.insert(key, (f, k)).is_some() {
                            return Err(HullError::Internal(
                                "edge shared by more than two faces".into(),
                            ));
                        }
                    }
                }
            }
        }
        if !open.is_empty() {
            return Err(HullError::Internal("unpaired edge in new face set".into()));
        }
        Ok(())
    }

    /// Assigns point `i` to the candidate face it is farthest above, if any.
    fn assign_conflict(&mut self, i: usize, candidates: &[usize]) {
        let p = &self.points[i];
        let mut best: Option<(usize, f64)> = None;
        for &f in candidates {
            let d = self.faces[f].dist(p);
            if d > self.eps && best.map_or(true, |(_, bd)| d > bd) {
                best = Some((f, d));
            }
        }
        if let Some((f, d)) = best {
            self.faces[f].conflicts.push((i, d));
        }
    }

    fn push_heap(&mut self, face: usize) {
        if let Some((_, d)) = self.faces[face].best() {
            self.heap.push(HeapEntry { dist: d, face });
        }
    }

    fn expand(&mut self) -> Result<(), HullError> {
        while let Some(entry) = self.heap.pop() {
            let seed = entry.face;
            if !self.faces[seed].alive {
                continue;
            }
            let (eye, _) = match self.faces[seed].best() {
                Some(b) => b,
                None => continue,
            };
            let eye_point = self.points[eye];

            // Faces visible from the eye, flood-filled over adjacency.
            let mut visible = vec![seed];
            let mut seen = HashMap::new();
            seen.insert(seed, ());
            let mut stack = vec![seed];
            while let Some(f) = stack.pop() {
                for k in 0..3 {
                    let g = self.faces[f].adj[k];
                    if seen.contains_key(&g) {
                        continue;
                    }
                    if self.faces[g].dist(&eye_point) > self.eps {
                        seen.insert(g, ());
                        visible.push(g);
                        stack.push(g);
                    }
                }
            }
            visible.sort_unstable();

            // Horizon: directed edges of visible faces whose neighbor is kept.
            let mut horizon: Vec<(usize, usize, usize)> = Vec::new(); // (a, b, outside face)
            for &f in &visible {
                for k in 0..3 {
                    let g = self.faces[f].adj[k];
                    if !seen.contains_key(&g) {
                        let a = self.faces[f].v[k];
                        let b = self.faces[f].v[(k + 1) % 3];
                        horizon.push((a, b, g));
                    }
                }
            }
            if horizon.len() < 3 {
                return Err(HullError::Internal(format!(
                    "horizon of {} edges",
                    horizon.len()
                )));
            }

            // Cone of new faces from the eye over the horizon.
            let mut new_ids = Vec::with_capacity(horizon.len());
            for &(a, b, g) in &horizon {
                let id = self.push_face([eye, a, b])?;
                // Attach to the kept face across (a, b).
                let slot = (0..3)
                    .find(|&k| {
                        let (x, y) = (self.faces[g].v[k], self.faces[g].v[(k + 1) % 3]);
                        (x == a && y == b) || (x == b && y == a)
                    })
                    .ok_or_else(|| HullError::Internal("horizon edge not found in neighbor".into()))?;
                self.faces[g].adj[slot] = id;
                let nslot = (0..3)
                    .find(|&k| {
                        let (x, y) = (self.faces[id].v[k], self.faces[id].v[(k + 1) % 3]);
                        (x == a && y == b) || (x == b && y == a)
                    })
                    .expect("new face contains its horizon edge");
                self.faces[id].adj[nslot] = g;
                new_ids.push(id);
            }

            // Pair ring edges (the ones through the eye) among the new faces.
            let mut open: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
            for &f in &new_ids {
                for k in 0..3 {
                    if self.faces[f].adj[k] != usize::MAX {
                        continue;
                    }
                    let a = self.faces[f].v[k];
                    let b = self.faces[f].v[(k + 1) % 3];
                    let key = (a.min(b), a.max(b));
                    match open.remove(&key) {
                        Some((g, slot)) => {
                            self.faces[f].adj[k] = g;
                            self.faces[g].adj[slot] = f;
                        }
                        None => {
                            if open.insert(key, (f, k)).is_some() {
                                return Err(HullError::Internal("pinched horizon".into()));
                            }
                        }
                    }
                }
            }
            if !open.is_empty() {
                return Err(HullError::Internal("unpaired cone edge".into()));
            }

            // Re-home orphaned conflict points onto the new faces.
            let mut orphans: Vec<usize> = Vec::new();
            for &f in &visible {
                self.faces[f].alive = false;
                let conflicts = std::mem::take(&mut self.faces[f].conflicts);
                for (i, _) in conflicts {
                    if i != eye {
                        orphans.push(i);
                    }
                }
            }
            for i in orphans {
                self.assign_conflict(i, &new_ids);
            }
            for &f in &new_ids {
                self.push_heap(f);
            }
        }
        Ok(())
    }

    fn finish(self, classify_grazing: bool) -> Result<HullMesh, HullError> {
        let mut vertex_set: std::collections::BTreeSet<usize> = std::collections::BTreeSet::new();
        let mut alive_faces = Vec::new();
        for face in &self.faces {
            if face.alive {
                vertex_set.extend(face.v);
                alive_faces.push(face);
            }
        }
        let source_index: Vec<usize> = vertex_set.iter().copied().collect();
        let mut remap: HashMap<usize, usize> = HashMap::with_capacity(source_index.len());
        for (new, &orig) in source_index.iter().enumerate() {
            remap.insert(orig, new);
        }
        let vertices: Vec<Point3> = source_index.iter().map(|&i| self.points[i]).collect();
        let mut faces = Vec::with_capacity(alive_faces.len());
        let mut face_normals = Vec::with_capacity(alive_faces.len());
        for face in &alive_faces {
            faces.push([remap[&face.v[0]], remap[&face.v[1]], remap[&face.v[2]]]);
            face_normals.push(face.normal);
        }

        let mut vertex_on_hull = vec![false; self.points.len()];
        for &i in &source_index {
            vertex_on_hull[i] = true;
        }
        // Grazing points: not part of the triangulation but within eps of a
        // face plane. A strictly interior point sits below every face plane by
        // more than eps; prune the deep interior with an inscribed ball first.
        if classify_grazing {
            let r_in = alive_faces
                .iter()
                .map(|f| f.offset - f.normal.dot(&self.interior.coords))
                .fold(f64::INFINITY, f64::min);
            for (i, p) in self.points.iter().enumerate() {
                if vertex_on_hull[i] {
                    continue;
                }
                if (p - self.interior).norm() < r_in - self.eps {
                    continue;
                }
                if alive_faces.iter().any(|f| f.dist(p) >= -self.eps) {
                    vertex_on_hull[i] = true;
                }
            }
        }

        let mesh = TriangleMesh {
            vertices,
            faces,
            face_normals,
            source_index,
        };
        Ok(HullMesh {
            mesh,
            vertex_on_hull,
            epsilon: self.eps,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::mesh_topology_check;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn too_few_points() {
        let pts = vec![Point3::origin(); 3];
        assert!(matches!(
            quickhull3(&pts, &HullConfig::default()),
            Err(HullError::TooFewPoints { got: 3 })
        ));
    }

    #[test]
    fn coincident_points() {
        let pts = vec![Point3::new(1.0, 2.0, 3.0); 5];
        assert!(matches!(
            quickhull3(&pts, &HullConfig::default()),
            Err(HullError::Degenerate { dimension: 0, .. })
        ));
    }

    #[test]
    fn collinear_points() {
        let pts: Vec<Point3> = (0..6).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect();
        assert!(matches!(
            quickhull3(&pts, &HullConfig::default()),
            Err(HullError::Degenerate { dimension: 1, .. })
        ));
    }

    #[test]
    fn coplanar_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Point3> = (0..20)
            .map(|_| Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 2.0))
            .collect();
        assert!(matches!(
            quickhull3(&pts, &HullConfig::default()),
            Err(HullError::Degenerate { dimension: 2, .. })
        ));
    }

    #[test]
    fn tetrahedron_hull() {
        let pts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
        ];
        let hull = quickhull3(&pts, &HullConfig::default()).unwrap();
        assert_eq!(hull.mesh.face_count(), 4);
        assert!(hull.vertex_on_hull.iter().all(|&b| b));
        let report = mesh_topology_check(&hull.mesh).unwrap();
        assert!(report.is_closed);
        assert_eq!(report.euler_characteristic, 2);
    }

    #[test]
    fn cube_with_center_point() {
        let mut pts = Vec::new();
        for x in [0.0, 1.0] {
            for y in [0.0, 1.0] {
                for z in [0.0, 1.0] {
                    pts.push(Point3::new(x, y, z));
                }
            }
        }
        pts.push(Point3::new(0.5, 0.5, 0.5));
        let hull = quickhull3(&pts, &HullConfig::default()).unwrap();
        assert_eq!(hull.mesh.face_count(), 12);
        assert!(!hull.vertex_on_hull[8]);
        assert_eq!(hull.vertex_on_hull.iter().filter(|&&b| b).count(), 8);
        // Every face plane must be one of the six cube side planes.
        for (face, n) in hull.mesh.faces.iter().zip(hull.mesh.face_normals.iter()) {
            let c = (hull.mesh.vertices[face[0]].coords
                + hull.mesh.vertices[face[1]].coords
                + hull.mesh.vertices[face[2]].coords)
                / 3.0;
            let axis = (0..3).find(|&a| n[a].abs() > 0.99).expect("axis plane");
            let expect = if n[axis] > 0.0 { 1.0 } else { 0.0 };
            assert!((c[axis] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn octahedron_hull() {
        let pts = vec![
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(-1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, -1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
            Point3::new(0.0, 0.0, -1.0),
        ];
        let hull = quickhull3(&pts, &HullConfig::default()).unwrap();
        assert_eq!(hull.mesh.face_count(), 8);
        assert!(hull.vertex_on_hull.iter().all(|&b| b));
    }

    #[test]
    fn soundness_on_random_ball() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let pts: Vec<Point3> = (0..300)
                .map(|_| {
                    Point3::new(
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                    )
                })
                .collect();
            let hull = quickhull3(&pts, &HullConfig::default()).unwrap();
            let report = mesh_topology_check(&hull.mesh).unwrap();
            assert!(report.is_closed);
            assert_eq!(report.euler_characteristic, 2);
            for p in &pts {
                for (face, n) in hull.mesh.faces.iter().zip(hull.mesh.face_normals.iter()) {
                    let c = (hull.mesh.vertices[face[0]].coords
                        + hull.mesh.vertices[face[1]].coords
                        + hull.mesh.vertices[face[2]].coords)
                        / 3.0;
                    assert!(
                        n.dot(&(p.coords - c)) <= hull.epsilon.max(1e-12),
                        "input point above a hull face"
                    );
                }
            }
        }
    }

    #[test]
    fn deterministic_for_fixed_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts: Vec<Point3> = (0..200)
            .map(|_| {
                Point3::new(
                    rng.gen_range(-5.0..5.0),
                    rng.gen_range(-5.0..5.0),
                    rng.gen_range(-5.0..5.0),
                )
            })
            .collect();
        let a = quickhull3(&pts, &HullConfig::default()).unwrap();
        let b = quickhull3(&pts, &HullConfig::default()).unwrap();
        assert_eq!(a.mesh.faces, b.mesh.faces);
        assert_eq!(a.mesh.source_index, b.mesh.source_index);
        assert_eq!(a.vertex_on_hull, b.vertex_on_hull);
    }

    #[test]
    fn contains_tetrahedron_queries() {
        let pts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
        ];
        let hull = quickhull3(&pts, &HullConfig::default()).unwrap();
        let centroid = Point3::new(0.25, 0.25, 0.25);
        assert!(hull_contains(&hull, &centroid, 0.0).unwrap());
        assert!(hull_contains(&hull, &pts[1], 1e-9).unwrap());
        assert!(!hull_contains(&hull, &Point3::new(2.0, 2.0, 2.0), 1e-9).unwrap());
    }

    #[test]
    fn grazing_point_is_on_hull_but_not_a_vertex() {
        let mut pts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
            Point3::new(0.0, 2.0, 0.0),
            Point3::new(0.0, 0.0, 2.0),
        ];
        // Interior of the bottom face: on the hull boundary, never a vertex.
        pts.push(Point3::new(0.5, 0.5, 0.0));
        let hull = quickhull3(&pts, &HullConfig::default()).unwrap();
        assert!(hull.vertex_on_hull[4]);
        assert!(!hull.mesh.source_index.contains(&4));
    }
}
