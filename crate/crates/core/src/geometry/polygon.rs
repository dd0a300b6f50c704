use serde::{Deserialize, Serialize};

use super::vector::{Point2, Pose2, Vec2};
use super::{GeometryError, EPS};

/// Clipping results below this area are treated as empty.
pub const MIN_AREA: f64 = 1e-12;

/// A strictly convex polygon with counter-clockwise vertices.
///
/// Construction merges collinear vertices, so every consecutive edge pair
/// turns strictly left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2>", into = "Vec<Point2>")]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

impl TryFrom<Vec<Point2>> for ConvexPolygon {
    type Error = GeometryError;
    fn try_from(v: Vec<Point2>) -> Result<Self, Self::Error> {
        ConvexPolygon::new(v)
    }
}

impl From<ConvexPolygon> for Vec<Point2> {
    fn from(p: ConvexPolygon) -> Self {
        p.vertices
    }
}

fn signed_area(pts: &[Point2]) -> f64 {
    let n = pts.len();
    let mut s = 0.0;
    for i in 0..n {
        s += pts[i].cross(pts[(i + 1) % n]);
    }
    0.5 * s
}

/// Distance of `p` from the infinite line through `a` and `b`.
fn line_offset(a: Point2, b: Point2, p: Point2) -> f64 {
    let d = b - a;
    let len = d.norm();
    if len == 0.0 {
        return p.distance(a);
    }
    d.cross(p - a) / len
}

/// Drops consecutive duplicates and vertices lying on the segment between
/// their neighbours. Returns `None` when fewer than three vertices survive.
fn clean_ring(mut pts: Vec<Point2>) -> Option<Vec<Point2>> {
    pts.dedup_by(|a, b| a.distance(*b) <= EPS);
    while pts.len() > 1 && pts[0].distance(pts[pts.len() - 1]) <= EPS {
        pts.pop();
    }
    let mut changed = true;
    while changed && pts.len() >= 3 {
        changed = false;
        let n = pts.len();
        for i in 0..n {
            let prev = pts[(i + n - 1) % n];
            let next = pts[(i + 1) % n];
            if line_offset(prev, next, pts[i]).abs() <= EPS {
                pts.remove(i);
                changed = true;
                break;
            }
        }
    }
    (pts.len() >= 3).then_some(pts)
}

impl ConvexPolygon {
    /// Validates and normalizes a vertex ring. Clockwise input is reversed;
    /// collinear vertices are merged.
    pub fn new(vertices: Vec<Point2>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::Degenerate);
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        for i in 0..vertices.len() {
            for j in (i + 1)..vertices.len() {
                if vertices[i].distance(vertices[j]) <= EPS {
                    return Err(GeometryError::Degenerate);
                }
            }
        }
        let mut pts = clean_ring(vertices).ok_or(GeometryError::Degenerate)?;
        let area = signed_area(&pts);
        if area.abs() <= MIN_AREA {
            return Err(GeometryError::Degenerate);
        }
        if area < 0.0 {
            pts.reverse();
        }
        let n = pts.len();
        let mut turning = 0.0;
        for i in 0..n {
            let e0 = pts[(i + 1) % n] - pts[i];
            let e1 = pts[(i + 2) % n] - pts[(i + 1) % n];
            if e0.cross(e1) <= 0.0 {
                return Err(GeometryError::NotConvex);
            }
            turning += e0.cross(e1).atan2(e0.dot(e1));
        }
        // A pentagram turns left everywhere but winds twice.
        if (turning - std::f64::consts::TAU).abs() > 1e-6 {
            return Err(GeometryError::NotConvex);
        }
        Ok(ConvexPolygon { vertices: pts })
    }

    /// Builds a polygon from clipping output, which may carry near-duplicate
    /// or collinear vertices. Tiny results collapse to `None`.
    pub(crate) fn from_clipped(pts: Vec<Point2>) -> Option<Self> {
        let pts = clean_ring(pts)?;
        let area = signed_area(&pts);
        if area <= MIN_AREA {
            return None;
        }
        Some(ConvexPolygon { vertices: pts })
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, GeometryError> {
        ConvexPolygon::new(vec![Vec2::new(x0, y0), Vec2::new(x1, y0), Vec2::new(x1, y1), Vec2::new(x0, y1)])
    }

    /// Regular polygon with `n` vertices on a circle of radius `r` about the origin.
    pub fn regular(n: usize, r: f64) -> Result<Self, GeometryError> {
        let pts = (0..n).map(|i| Vec2::from_angle(std::f64::consts::TAU * i as f64 / n as f64) * r).collect();
        ConvexPolygon::new(pts)
    }

    #[inline]
    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edge `i` runs from vertex `i` to vertex `i + 1`.
    #[inline]
    pub fn edge(&self, i: usize) -> (Point2, Point2) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    /// Outward unit normal of edge `i`.
    #[inline]
    pub fn edge_normal(&self, i: usize) -> Vec2 {
        let (a, b) = self.edge(i);
        let d = b - a;
        Vec2::new(d.y, -d.x) / d.norm()
    }

    /// Rotation by `pose.theta` followed by translation.
    pub fn transform(&self, pose: &Pose2) -> ConvexPolygon {
        ConvexPolygon { vertices: self.vertices.iter().map(|&v| pose.apply(v)).collect() }
    }

    pub fn translate(&self, d: Vec2) -> ConvexPolygon {
        ConvexPolygon { vertices: self.vertices.iter().map(|&v| v + d).collect() }
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Point2 {
        let n = self.vertices.len();
        // Shift to the first vertex for conditioning.
        let o = self.vertices[0];
        let mut a2 = 0.0;
        let mut c = Vec2::ZERO;
        for i in 0..n {
            let p = self.vertices[i] - o;
            let q = self.vertices[(i + 1) % n] - o;
            let w = p.cross(q);
            a2 += w;
            c += (p + q) * w;
        }
        o + c / (3.0 * a2)
    }

    /// Polar second moment of area about the centroid, divided by the area.
    /// This is the rotational inertia of the lamina at unit mass.
    pub fn unit_mass_inertia(&self) -> f64 {
        let c = self.centroid();
        let n = self.vertices.len();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            let p = self.vertices[i] - c;
            let q = self.vertices[(i + 1) % n] - c;
            let w = p.cross(q);
            num += w * (p.dot(p) + p.dot(q) + q.dot(q));
            den += w;
        }
        num / (6.0 * den)
    }

    /// Largest vertex distance from the centroid.
    pub fn circumradius(&self) -> f64 {
        let c = self.centroid();
        self.vertices.iter().map(|v| v.distance(c)).fold(0.0, f64::max)
    }

    /// Maximum pairwise vertex distance.
    pub fn longest_diagonal(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                best = best.max(a.distance(*b));
            }
        }
        best
    }

    /// Projection interval `(min, max)` of the vertices on `dir`.
    pub fn project(&self, dir: Vec2) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in &self.vertices {
            let d = v.dot(dir);
            lo = lo.min(d);
            hi = hi.max(d);
        }
        (lo, hi)
    }

    /// Extent of the polygon along the unit vector `dir`.
    pub fn width_along(&self, dir: Vec2) -> f64 {
        let (lo, hi) = self.project(dir);
        hi - lo
    }

    /// `(min, max)` corners of the axis-aligned bounding box.
    pub fn aabb(&self) -> (Point2, Point2) {
        let (x0, x1) = self.project(Vec2::X);
        let (y0, y1) = self.project(Vec2::Y);
        (Vec2::new(x0, y0), Vec2::new(x1, y1))
    }

    /// Closed point containment, with `EPS` slack.
    pub fn contains(&self, p: Point2) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let (a, b) = self.edge(i);
            (b - a).cross(p - a) >= -EPS * (b - a).norm()
        })
    }

    /// Keeps the part of the polygon with `dot(normal, p - point) <= 0`.
    pub fn clip_halfplane(&self, point: Point2, normal: Vec2) -> Option<ConvexPolygon> {
        clip_ring(&self.vertices, point, normal).and_then(ConvexPolygon::from_clipped)
    }
}

fn clip_ring(ring: &[Point2], point: Point2, normal: Vec2) -> Option<Vec<Point2>> {
    let n = ring.len();
    if n == 0 {
        return None;
    }
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let p = ring[i];
        let q = ring[(i + 1) % n];
        let dp = normal.dot(p - point);
        let dq = normal.dot(q - point);
        if dp <= 0.0 {
            out.push(p);
        }
        if (dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0) {
            let t = dp / (dp - dq);
            out.push(p + (q - p) * t);
        }
    }
    (out.len() >= 3).then_some(out)
}

/// Intersection of two convex polygons by successive half-plane clipping of
/// `a` against the edges of `b`. Touching or sliver results are `None`.
pub fn intersect_convex(a: &ConvexPolygon, b: &ConvexPolygon) -> Option<ConvexPolygon> {
    let (amin, amax) = a.aabb();
    let (bmin, bmax) = b.aabb();
    if amin.x > bmax.x || bmin.x > amax.x || amin.y > bmax.y || bmin.y > amax.y {
        return None;
    }
    let mut ring = a.vertices.clone();
    for i in 0..b.len() {
        let (p, _) = b.edge(i);
        ring = clip_ring(&ring, p, b.edge_normal(i))?;
    }
    ConvexPolygon::from_clipped(ring)
}

/// Area of `a ∩ b`, zero when empty.
pub fn intersection_area(a: &ConvexPolygon, b: &ConvexPolygon) -> f64 {
    intersect_convex(a, b).map_or(0.0, |p| p.area())
}

/// Andrew's monotone chain. Errors when the points span no area.
pub fn convex_hull(points: &[Point2]) -> Result<ConvexPolygon, GeometryError> {
    if points.len() < 3 {
        return Err(GeometryError::Degenerate);
    }
    let mut pts: Vec<Point2> = points.to_vec();
    if pts.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.distance(*b) <= EPS);
    if pts.len() < 3 {
        return Err(GeometryError::Degenerate);
    }
    let turn = |o: Point2, a: Point2, b: Point2| (a - o).cross(b - o);
    let mut lower: Vec<Point2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    let ring = clean_ring(lower).ok_or(GeometryError::Degenerate)?;
    if signed_area(&ring) <= MIN_AREA {
        return Err(GeometryError::Degenerate);
    }
    Ok(ConvexPolygon { vertices: ring })
}

fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let d = b - a;
    let len2 = d.norm_sq();
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    p.distance(a + d * t)
}

/// Separating-axis overlap test; touching counts as not overlapping.
pub fn overlaps(a: &ConvexPolygon, b: &ConvexPolygon) -> bool {
    fn separated_by(a: &ConvexPolygon, b: &ConvexPolygon) -> bool {
        (0..a.len()).any(|i| {
            let n = a.edge_normal(i);
            let (lo, _) = b.project(n);
            lo - n.dot(a.vertices[i]) >= -EPS
        })
    }
    !(separated_by(a, b) || separated_by(b, a))
}

/// Minimum Euclidean distance between two convex polygons; 0 on overlap.
pub fn distance(a: &ConvexPolygon, b: &ConvexPolygon) -> f64 {
    if overlaps(a, b) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for (p, q) in [(a, b), (b, a)] {
        for &v in p.vertices() {
            for i in 0..q.len() {
                let (s, e) = q.edge(i);
                best = best.min(point_segment_distance(v, s, e));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq() -> ConvexPolygon {
        ConvexPolygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap()
    }

    fn tri() -> ConvexPolygon {
        ConvexPolygon::new(vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.5, 3f64.sqrt() / 2.0)]).unwrap()
    }

    #[test]
    fn unit_square_accepted() {
        let p = ConvexPolygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap();
        assert!((p.area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn clockwise_input_reordered() {
        let p = ConvexPolygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
        ])
        .unwrap();
        assert!(p.area() > 0.0);
        assert_eq!(p.vertices()[0], Vec2::new(1.0, 0.0));
    }

    #[test]
    fn collinear_rejected() {
        let r = ConvexPolygon::new(vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)]);
        assert_eq!(r, Err(GeometryError::Degenerate));
    }

    #[test]
    fn duplicates_and_short_input_rejected() {
        let r = ConvexPolygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 1.0),
        ]);
        assert_eq!(r, Err(GeometryError::Degenerate));
        assert_eq!(ConvexPolygon::new(vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)]), Err(GeometryError::Degenerate));
    }

    #[test]
    fn nonconvex_rejected() {
        // Arrow-head pentagon with a reflex vertex.
        let r = ConvexPolygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(1.0, 0.5),
            Vec2::new(0.0, 2.0),
        ]);
        assert_eq!(r, Err(GeometryError::NotConvex));
        let star: Vec<Vec2> = (0..5).map(|i| Vec2::from_angle(std::f64::consts::TAU * (2 * i) as f64 / 5.0)).collect();
        assert_eq!(ConvexPolygon::new(star), Err(GeometryError::NotConvex));
    }

    #[test]
    fn collinear_vertex_merged() {
        let p = ConvexPolygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.5, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap();
        assert_eq!(p.len(), 4);
    }

    #[test]
    fn transform_examples() {
        let s = sq();
        let t = s.transform(&Pose2::new(1.0, 2.0, 0.0));
        for (a, b) in s.vertices().iter().zip(t.vertices()) {
            assert!((*b - *a - Vec2::new(1.0, 2.0)).norm() < 1e-15);
        }
        let r = s.transform(&Pose2::new(0.0, 0.0, std::f64::consts::FRAC_PI_2));
        assert!((r.area() - 1.0).abs() < 1e-12);
        assert_eq!(s.transform(&Pose2::IDENTITY), s);
    }

    #[test]
    fn area_examples() {
        assert_eq!(sq().area(), 1.0);
        assert_eq!(ConvexPolygon::rectangle(0.0, 0.0, 2.0, 1.0).unwrap().area(), 2.0);
        assert!((tri().area() - 3f64.sqrt() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn hull_examples() {
        let pts =
            [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0), Vec2::new(0.5, 0.5)];
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.len(), 4);
        assert!((h.area() - 1.0).abs() < 1e-15);

        let mut two = sq().vertices().to_vec();
        two.extend(sq().translate(Vec2::new(3.0, 0.0)).vertices());
        let h = convex_hull(&two).unwrap();
        assert_eq!(h.len(), 4);
        assert!((h.area() - 4.0).abs() < 1e-12);
        for v in [Vec2::new(0.0, 0.0), Vec2::new(4.0, 0.0), Vec2::new(4.0, 1.0), Vec2::new(0.0, 1.0)] {
            assert!(h.vertices().iter().any(|w| w.distance(v) < 1e-12));
        }

        let line: Vec<Vec2> = (0..5).map(|i| Vec2::new(i as f64, 2.0 * i as f64)).collect();
        assert_eq!(convex_hull(&line), Err(GeometryError::Degenerate));
    }

    #[test]
    fn intersection_examples() {
        let a = sq();
        let b = sq().translate(Vec2::new(0.5, 0.0));
        let i = intersect_convex(&a, &b).unwrap();
        assert!((i.area() - 0.5).abs() < 1e-12);
        assert!(intersect_convex(&a, &sq().translate(Vec2::new(3.0, 0.0))).is_none());
        // Edge touching has zero area.
        assert!(intersect_convex(&a, &sq().translate(Vec2::new(1.0, 0.0))).is_none());
    }

    #[test]
    fn distance_examples() {
        let a = sq().translate(Vec2::new(-0.5, -0.5));
        let b = sq().translate(Vec2::new(1.5, -0.5));
        assert!((distance(&a, &b) - 1.0).abs() < 1e-15);
        assert_eq!(distance(&a, &sq()), 0.0);
        assert_eq!(distance(&sq(), &sq().translate(Vec2::new(1.0, 0.0))), 0.0);
    }

    #[test]
    fn diagonal_and_width_examples() {
        assert!((sq().longest_diagonal() - 2f64.sqrt()).abs() < 1e-15);
        assert!((ConvexPolygon::rectangle(0.0, 0.0, 2.0, 1.0).unwrap().longest_diagonal() - 5f64.sqrt()).abs() < 1e-15);
        assert!((tri().longest_diagonal() - 1.0).abs() < 1e-15);
        assert!((sq().width_along(Vec2::X) - 1.0).abs() < 1e-15);
        let d = Vec2::new(1.0, 1.0).normalized().unwrap();
        assert!((sq().width_along(d) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn centroid_and_inertia_of_square() {
        let s = sq().translate(Vec2::new(3.0, -2.0));
        assert!((s.centroid() - Vec2::new(3.5, -1.5)).norm() < 1e-12);
        // (a^2 + b^2) / 12 for a unit square.
        assert!((s.unit_mass_inertia() - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn halfplane_clip() {
        let h = sq().clip_halfplane(Vec2::new(0.25, 0.0), Vec2::X).unwrap();
        assert!((h.area() - 0.25).abs() < 1e-12);
        assert!(sq().clip_halfplane(Vec2::new(-1.0, 0.0), Vec2::X).is_none());
    }
}
