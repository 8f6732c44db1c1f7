//! Small kd-tree over 3D points supporting nearest-neighbor, radius, and
//! axis-aligned box queries.
//!
//! Nearest-neighbor ties are broken toward the lowest point index so that
//! queries are reproducible and match a linear scan with the same rule.

use crate::geom::Point3;

#[derive(Debug, Clone)]
struct Node {
    /// Point stored at this node (index into `points`).
    point: usize,
    axis: usize,
    left: Option<usize>,
    right: Option<usize>,
}

/// Immutable kd-tree over a borrowed-by-value point set.
#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Point3>,
    nodes: Vec<Node>,
    root: Option<usize>,
}

impl KdTree {
    pub fn build(points: &[Point3]) -> Self {
        let mut indices: Vec<usize> = (0..points.len()).collect();
        let mut tree = KdTree {
            points: points.to_vec(),
            nodes: Vec::with_capacity(points.len()),
            root: None,
        };
        tree.root = tree.build_rec(&mut indices, 0);
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, index: usize) -> Point3 {
        self.points[index]
    }

    fn build_rec(&mut self, indices: &mut [usize], depth: usize) -> Option<usize> {
        if indices.is_empty() {
            return None;
        }
        let axis = depth % 3;
        let mid = indices.len() / 2;
        // Order by (coordinate, index) so splits are deterministic under ties.
        indices.select_nth_unstable_by(mid, |&a, &b| {
            self.points[a][axis]
                .total_cmp(&self.points[b][axis])
                .then(a.cmp(&b))
        });
        let point = indices[mid];
        let node_id = self.nodes.len();
        self.nodes.push(Node {
            point,
            axis,
            left: None,
            right: None,
        });
        let (lo, rest) = indices.split_at_mut(mid);
        let hi = &mut rest[1..];
        let left = self.build_rec(lo, depth + 1);
        let right = self.build_rec(hi, depth + 1);
        self.nodes[node_id].left = left;
        self.nodes[node_id].right = right;
        Some(node_id)
    }

    /// Euclidean nearest point; ties broken toward the lowest index.
    /// Returns `(index, squared_distance)`.
    pub fn nearest(&self, q: &Point3) -> Option<(usize, f64)> {
        let root = self.root?;
        let mut best: Option<(usize, f64)> = None;
        self.nearest_rec(root, q, &mut best);
        best
    }

    fn nearest_rec(&self, node_id: usize, q: &Point3, best: &mut Option<(usize, f64)>) {
        let node = &self.nodes[node_id];
        let p = self.points[node.point];
        let d2 = (p - q).norm_squared();
        let better = match *best {
            None => true,
            Some((bi, bd2)) => d2 < bd2 || (d2 == bd2 && node.point < bi),
        };
        if better {
            *best = Some((node.point, d2));
        }
        let delta = q[node.axis] - p[node.axis];
        let (near, far) = if delta < 0.0 {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        if let Some(n) = near {
            self.nearest_rec(n, q, best);
        }
        if let Some(f) = far {
            // The far side can still hold the winner, including exact ties
            // that must be broken by index.
            if best.map_or(true, |(_, bd2)| delta * delta <= bd2) {
                self.nearest_rec(f, q, best);
            }
        }
    }

    /// Indices of all points within `radius` of `q`, ascending.
    pub fn within_radius(&self, q: &Point3, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if let Some(root) = self.root {
            self.radius_rec(root, q, radius * radius, radius, &mut out);
        }
        out.sort_unstable();
        out
    }

    fn radius_rec(&self, node_id: usize, q: &Point3, r2: f64, r: f64, out: &mut Vec<usize>) {
        let node = &self.nodes[node_id];
        let p = self.points[node.point];
        if (p - q).norm_squared() <= r2 {
            out.push(node.point);
        }
        let delta = q[node.axis] - p[node.axis];
        if delta - r <= 0.0 {
            if let Some(l) = node.left {
                self.radius_rec(l, q, r2, r, out);
            }
        }
        if delta + r >= 0.0 {
            if let Some(rr) = node.right {
                self.radius_rec(rr, q, r2, r, out);
            }
        }
    }

    /// Indices of all points inside the axis-aligned box `[lo, hi]`, ascending.
    pub fn within_box(&self, lo: &Point3, hi: &Point3) -> Vec<usize> {
        let mut out = Vec::new();
        if let Some(root) = self.root {
            self.box_rec(root, lo, hi, &mut out);
        }
        out.sort_unstable();
        out
    }

    fn box_rec(&self, node_id: usize, lo: &Point3, hi: &Point3, out: &mut Vec<usize>) {
        let node = &self.nodes[node_id];
        let p = self.points[node.point];
        if (0..3).all(|a| p[a] >= lo[a] && p[a] <= hi[a]) {
            out.push(node.point);
        }
        let axis = node.axis;
        if lo[axis] <= p[axis] {
            if let Some(l) = node.left {
                self.box_rec(l, lo, hi, out);
            }
        }
        if hi[axis] >= p[axis] {
            if let Some(r) = node.right {
                self.box_rec(r, lo, hi, out);
            }
        }
    }
}
