//! Separating-axis contact manifolds between convex vertex rings.

use crate::geometry::Vec2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ManifoldPoint {
    pub point: Vec2,
    /// Positive when penetrating; down to `-slop` for near contacts.
    pub depth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Manifold {
    /// Unit normal pointing from the first body into the second.
    pub normal: Vec2,
    pub points: [ManifoldPoint; 2],
    pub count: usize,
}

impl Manifold {
    pub fn points(&self) -> &[ManifoldPoint] {
        &self.points[..self.count]
    }

    pub fn max_depth(&self) -> f64 {
        self.points().iter().map(|p| p.depth).fold(f64::NEG_INFINITY, f64::max)
    }
}

#[inline]
fn edge_normal(ring: &[Vec2], i: usize) -> Vec2 {
    let d = ring[(i + 1) % ring.len()] - ring[i];
    Vec2::new(d.y, -d.x) / d.norm()
}

/// Largest separation of `other` along the outward edge normals of `ring`.
fn max_separation(ring: &[Vec2], other: &[Vec2]) -> (f64, usize) {
    let mut best = f64::NEG_INFINITY;
    let mut best_i = 0;
    for i in 0..ring.len() {
        let n = edge_normal(ring, i);
        let a = ring[i];
        let s = other.iter().map(|&v| n.dot(v - a)).fold(f64::INFINITY, f64::min);
        if s > best {
            best = s;
            best_i = i;
        }
    }
    (best, best_i)
}

/// Contact between two CCW convex rings, or `None` when they are separated
/// by more than `slop`.
pub(crate) fn manifold(a: &[Vec2], b: &[Vec2], slop: f64) -> Option<Manifold> {
    let (sep_a, edge_a) = max_separation(a, b);
    if sep_a > slop {
        return None;
    }
    let (sep_b, edge_b) = max_separation(b, a);
    if sep_b > slop {
        return None;
    }
    // Prefer `a` as reference unless `b` is clearly better; keeps the choice
    // stable between iterations.
    let (reference, incident, ref_edge, flip) =
        if sep_b > sep_a + 1e-12 { (b, a, edge_b, true) } else { (a, b, edge_a, false) };
    let n = edge_normal(reference, ref_edge);
    let r1 = reference[ref_edge];
    let r2 = reference[(ref_edge + 1) % reference.len()];

    let mut inc = 0;
    let mut best = f64::INFINITY;
    for i in 0..incident.len() {
        let d = edge_normal(incident, i).dot(n);
        if d < best {
            best = d;
            inc = i;
        }
    }
    let i1 = incident[inc];
    let i2 = incident[(inc + 1) % incident.len()];

    let t = (r2 - r1) / (r2 - r1).norm();
    let clip = |p: Vec2, q: Vec2, origin: Vec2, dir: Vec2| -> Option<(Vec2, Vec2)> {
        // Keep the part with dir·(x - origin) >= 0.
        let dp = dir.dot(p - origin);
        let dq = dir.dot(q - origin);
        match (dp >= 0.0, dq >= 0.0) {
            (true, true) => Some((p, q)),
            (false, false) => None,
            (true, false) => Some((p, p + (q - p) * (dp / (dp - dq)))),
            (false, true) => Some((p + (q - p) * (dp / (dp - dq)), q)),
        }
    };
    let (c1, c2) = clip(i1, i2, r1, t).and_then(|(p, q)| clip(p, q, r2, -t))?;

    let mut points = [ManifoldPoint { point: Vec2::ZERO, depth: 0.0 }; 2];
    let mut count = 0;
    for p in [c1, c2] {
        let s = n.dot(p - r1);
        if s <= slop {
            if count == 1 && points[0].point.distance(p) <= 1e-12 {
                points[0].depth = points[0].depth.max(-s);
                continue;
            }
            points[count] = ManifoldPoint { point: p, depth: -s };
            count += 1;
        }
    }
    if count == 0 {
        return None;
    }
    Some(Manifold { normal: if flip { -n } else { n }, points, count })
}
