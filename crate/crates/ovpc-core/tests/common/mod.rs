//! Independent oracles shared by the integration suites. Everything here is
//! brute force on purpose: these functions define expected values without
//! reusing the implementation paths they check.

use ovpc_core::geom::{Point3, Vec3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Brute-force on-hull classification: a point is on the hull iff it lies
/// within `eps` of some supporting plane, where a supporting plane is spanned
/// by an input triple with every point on one side (within `eps`).
pub fn oracle_hull_vertices(points: &[Point3], eps: f64) -> Vec<bool> {
    let n = points.len();
    let mut on_hull = vec![false; n];
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let cross = (points[j] - points[i]).cross(&(points[k] - points[i]));
                let norm = cross.norm();
                if norm < 1e-300 {
                    continue;
                }
                let normal = cross / norm;
                let offset = normal.dot(&points[i].coords);
                let mut above = f64::NEG_INFINITY;
                let mut below = f64::INFINITY;
                for p in points {
                    let d = normal.dot(&p.coords) - offset;
                    above = above.max(d);
                    below = below.min(d);
                }
                let supporting_above = above <= eps;
                let supporting_below = below >= -eps;
                if !supporting_above && !supporting_below {
                    continue;
                }
                for (idx, p) in points.iter().enumerate() {
                    let d = normal.dot(&p.coords) - offset;
                    if (supporting_above && d >= -eps) || (supporting_below && d <= eps) {
                        on_hull[idx] = true;
                    }
                }
            }
        }
    }
    on_hull
}

/// True iff all points lie on one side of the plane through `(a, b, c)`
/// within `eps` (i.e. the triangle spans a supporting plane).
pub fn is_supporting_plane(points: &[Point3], a: usize, b: usize, c: usize, eps: f64) -> bool {
    let cross = (points[b] - points[a]).cross(&(points[c] - points[a]));
    let norm = cross.norm();
    if norm < 1e-300 {
        return false;
    }
    let normal = cross / norm;
    let offset = normal.dot(&points[a].coords);
    let mut above = f64::NEG_INFINITY;
    let mut below = f64::INFINITY;
    for p in points {
        let d = normal.dot(&p.coords) - offset;
        above = above.max(d);
        below = below.min(d);
    }
    above <= eps || below >= -eps
}

/// Uniform random unit vector.
pub fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// `n` points uniform in the spherical shell `radius in [r0, r1]` around
/// `center`: full directional coverage.
pub fn shell_cloud(rng: &mut ChaCha8Rng, n: usize, r0: f64, r1: f64, center: Point3) -> Vec<Point3> {
    (0..n)
        .map(|_| {
            let dir = random_unit(rng);
            // Uniform in volume within the shell.
            let u: f64 = rng.gen_range(0.0..1.0);
            let r = (r0.powi(3) + u * (r1.powi(3) - r0.powi(3))).cbrt();
            center + dir * r
        })
        .collect()
}

/// `n` points uniform in the ball of `radius`.
pub fn ball_cloud(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Vec<Point3> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if v.norm() <= 1.0 {
            out.push(Point3::from(v * radius));
        }
    }
    out
}

/// Linear-scan nearest neighbor with lowest-index tie-break.
pub fn linear_nearest(points: &[Point3], q: &Point3) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in points.iter().enumerate() {
        let d2 = (p - q).norm_squared();
        if best.map_or(true, |(_, bd2)| d2 < bd2) {
            best = Some((i, d2));
        }
    }
    best
}

/// First mesh hit along `dir`, retrying with tiny direction jitters when the
/// exact ray slips through a shared edge or vertex (which grid-aligned
/// synthetic scenes provoke constantly). The exit distance is continuous in
/// the direction, so a 1e-7 jitter changes it by far less than any tolerance
/// in use.
pub fn first_hit_distance_robust(
    mesh: &ovpc_core::TriangleMesh,
    origin: &Point3,
    dir: &Vec3,
) -> Option<f64> {
    use ovpc_core::raycast::first_hit_distance;
    if let Some(t) = first_hit_distance(mesh, origin, dir) {
        return Some(t);
    }
    let ortho_a = if dir.x.abs() < 0.9 {
        dir.cross(&Vec3::x()).normalize()
    } else {
        dir.cross(&Vec3::y()).normalize()
    };
    let ortho_b = dir.cross(&ortho_a);
    for (a, b) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0)] {
        let jittered = (dir + ortho_a * (a * 1e-7) + ortho_b * (b * 1e-7)).normalize();
        if let Some(t) = first_hit_distance(mesh, origin, &jittered) {
            return Some(t);
        }
    }
    None
}
