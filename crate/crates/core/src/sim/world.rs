//! Rigid bodies and the frictionless position projection.

use crate::geometry::{ConvexPolygon, Pose2, Vec2};
use crate::scene::{Scene, SceneObject};

use super::contact::{manifold, Manifold};
use super::qp::{least_norm, QpResult};
use super::BodyRef;

#[derive(Debug, Clone)]
pub(crate) struct Body {
    pub id: usize,
    /// Vertices relative to the centroid, at zero rotation.
    local: Vec<Vec2>,
    /// Centroid in the shape's own frame.
    shape_centroid: Vec2,
    pub inv_inertia: f64,
    /// Largest vertex distance from the centroid.
    radius: f64,
    pub pos: Vec2,
    pub angle: f64,
    pub world: Vec<Vec2>,
    pub lo: Vec2,
    pub hi: Vec2,
}

impl Body {
    /// `frame` maps world coordinates into the simulation frame.
    pub fn from_object(o: &SceneObject, frame: &Pose2) -> Body {
        let shape = o.shape();
        let c = shape.centroid();
        let local: Vec<Vec2> = shape.vertices().iter().map(|&v| v - c).collect();
        let radius = local.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let pose = frame.compose(&o.pose);
        let mut b = Body {
            id: o.id,
            local,
            shape_centroid: c,
            inv_inertia: 1.0 / shape.unit_mass_inertia(),
            radius,
            pos: pose.apply(c),
            angle: pose.theta,
            world: Vec::new(),
            lo: Vec2::ZERO,
            hi: Vec2::ZERO,
        };
        b.refresh();
        b
    }

    pub fn refresh(&mut self) {
        let (s, c) = self.angle.sin_cos();
        self.world.clear();
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.local {
            let w = Vec2::new(c * v.x - s * v.y + self.pos.x, s * v.x + c * v.y + self.pos.y);
            lo = Vec2::new(lo.x.min(w.x), lo.y.min(w.y));
            hi = Vec2::new(hi.x.max(w.x), hi.y.max(w.y));
            self.world.push(w);
        }
        self.lo = lo;
        self.hi = hi;
    }

    /// Object pose in world coordinates; `frame_inv` maps the simulation
    /// frame back to the world.
    pub fn world_pose(&self, frame_inv: &Pose2) -> Pose2 {
        // pos = R(angle) * shape_centroid + t  =>  t = pos - R(angle) * shape_centroid
        let t = self.pos - self.shape_centroid.rotate(self.angle);
        frame_inv.compose(&Pose2::new(t.x, t.y, self.angle))
    }

    pub fn polygon(&self) -> ConvexPolygon {
        ConvexPolygon::from_clipped(self.world.clone()).expect("rigid motion keeps a valid polygon")
    }
}

/// Kinematic obstacle (a jaw pad).
#[derive(Debug, Clone)]
pub(crate) struct Fixed {
    pub tag: BodyRef,
    pub world: Vec<Vec2>,
    pub lo: Vec2,
    pub hi: Vec2,
}

impl Fixed {
    pub fn new(tag: BodyRef, poly: &ConvexPolygon) -> Fixed {
        let (lo, hi) = poly.aabb();
        Fixed { tag, world: poly.vertices().to_vec(), lo, hi }
    }
}

#[inline]
fn boxes_touch(alo: Vec2, ahi: Vec2, blo: Vec2, bhi: Vec2, pad: f64) -> bool {
    alo.x <= bhi.x + pad && blo.x <= ahi.x + pad && alo.y <= bhi.y + pad && blo.y <= ahi.y + pad
}

/// Bodies closer than this are linearised as contacts, so that a sweep does
/// not push one body into a near neighbour.
const CONTACT_MARGIN: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ProjectReport {
    pub converged: bool,
    /// The last sweep proved that no motion removes the penetration.
    pub jammed: bool,
    /// Largest depth measured in the last sweep.
    pub max_depth: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct World {
    pub bodies: Vec<Body>,
    pub fixed: Vec<Fixed>,
}

/// A contact found between two members of the world.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RawContact {
    pub a: BodyRef,
    pub b: BodyRef,
    pub manifold: Manifold,
}

impl World {
    pub fn new(scene: &Scene, frame: &Pose2, fixed: Vec<Fixed>) -> World {
        World { bodies: scene.objects().iter().map(|o| Body::from_object(o, frame)).collect(), fixed }
    }

    /// Visits every touching pair: fixed-body pairs first, then body pairs in
    /// index order.
    fn for_each_pair(&self, pad: f64, mut f: impl FnMut(Option<usize>, usize, usize)) {
        for (fi, fx) in self.fixed.iter().enumerate() {
            for (bi, b) in self.bodies.iter().enumerate() {
                if boxes_touch(fx.lo, fx.hi, b.lo, b.hi, pad) {
                    f(Some(fi), bi, usize::MAX);
                }
            }
        }
        for i in 0..self.bodies.len() {
            for j in (i + 1)..self.bodies.len() {
                let (a, b) = (&self.bodies[i], &self.bodies[j]);
                if boxes_touch(a.lo, a.hi, b.lo, b.hi, pad) {
                    f(None, i, j);
                }
            }
        }
    }

    /// All contacts within `slop`, with depths.
    pub fn contacts(&self, slop: f64) -> Vec<RawContact> {
        let mut out = Vec::new();
        self.for_each_pair(slop, |f, i, j| match f {
            Some(fi) => {
                let fx = &self.fixed[fi];
                if let Some(m) = manifold(&fx.world, &self.bodies[i].world, slop) {
                    out.push(RawContact { a: fx.tag, b: BodyRef::Object(self.bodies[i].id), manifold: m });
                }
            }
            None => {
                if let Some(m) = manifold(&self.bodies[i].world, &self.bodies[j].world, slop) {
                    out.push(RawContact {
                        a: BodyRef::Object(self.bodies[i].id),
                        b: BodyRef::Object(self.bodies[j].id),
                        manifold: m,
                    });
                }
            }
        });
        out
    }

    /// Largest penetration depth over all pairs, split into
    /// (fixed-body, body-body).
    pub fn max_depths(&self) -> (f64, f64) {
        let mut fixed_depth = 0.0f64;
        let mut body_depth = 0.0f64;
        for c in self.contacts(0.0) {
            let d = c.manifold.max_depth().max(0.0);
            if matches!(c.a, BodyRef::Object(_)) {
                body_depth = body_depth.max(d);
            } else {
                fixed_depth = fixed_depth.max(d);
            }
        }
        (fixed_depth, body_depth)
    }

    /// Frictionless position projection. Each sweep linearises every
    /// contact within `CONTACT_MARGIN` and moves the free bodies by the
    /// smallest mass-weighted displacement that removes all penetration
    /// (unit mass, centroidal inertia); fixed bodies do not move.
    ///
    /// No vertex moves further than `max_move` in one sweep; a longer step
    /// is shortened and the contacts are linearised again. This keeps nearly
    /// parallel edge contacts, whose linearisation is poor, from flinging a
    /// body away.
    ///
    /// Converges when every depth is below `tol`. An infeasible sweep means
    /// the contacts admit a self-balanced set of forces: the configuration is
    /// jammed and is reported as not converged.
    pub fn project(&mut self, tol: f64, max_iters: usize, max_move: f64) -> ProjectReport {
        let mut max_depth = 0.0;
        for it in 0..max_iters {
            let contacts = self.contacts(CONTACT_MARGIN);
            max_depth = contacts.iter().map(|c| c.manifold.max_depth()).fold(0.0, f64::max);
            if max_depth < tol {
                return ProjectReport { converged: true, jammed: false, max_depth, iterations: it + 1 };
            }
            match self.solve_step(&contacts) {
                Some(mut dq) => {
                    let reach = self
                        .bodies
                        .iter()
                        .enumerate()
                        .map(|(i, b)| dq[3 * i].hypot(dq[3 * i + 1]) + dq[3 * i + 2].abs() * b.radius)
                        .fold(0.0, f64::max);
                    if reach > max_move {
                        let k = max_move / reach;
                        dq.iter_mut().for_each(|d| *d *= k);
                    }
                    self.apply(&dq)
                }
                None => return ProjectReport { converged: false, jammed: true, max_depth, iterations: it + 1 },
            }
        }
        ProjectReport { converged: false, jammed: false, max_depth, iterations: max_iters }
    }

    fn index_of(&self, r: BodyRef) -> Option<usize> {
        match r {
            BodyRef::Object(id) => self.bodies.iter().position(|b| b.id == id),
            _ => None,
        }
    }

    /// Displacement `(dx, dy, dθ)` per body for one linearised projection,
    /// or `None` when no displacement removes the penetration.
    fn solve_step(&self, contacts: &[RawContact]) -> Option<Vec<f64>> {
        let n = 3 * self.bodies.len();
        let scale: Vec<f64> = self.bodies.iter().map(|b| b.inv_inertia.sqrt()).collect();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for c in contacts {
            let ia = self.index_of(c.a);
            let ib = self.index_of(c.b);
            let nrm = c.manifold.normal;
            for p in c.manifold.points() {
                let mut row = vec![0.0; n];
                // Gap rate: b moves along the normal, a against it.
                for (idx, sign) in [(ib, 1.0), (ia, -1.0)] {
                    if let Some(i) = idx {
                        let arm = (p.point - self.bodies[i].pos).cross(nrm);
                        row[3 * i] += sign * nrm.x;
                        row[3 * i + 1] += sign * nrm.y;
                        row[3 * i + 2] += sign * arm * scale[i];
                    }
                }
                rows.push(row);
                rhs.push(p.depth);
            }
        }
        match least_norm(&rows, &rhs, n) {
            QpResult::Solved(mut z) => {
                for (i, s) in scale.iter().enumerate() {
                    z[3 * i + 2] *= s;
                }
                Some(z)
            }
            QpResult::Infeasible => None,
        }
    }

    fn apply(&mut self, dq: &[f64]) {
        for (i, b) in self.bodies.iter_mut().enumerate() {
            let (dx, dy, dt) = (dq[3 * i], dq[3 * i + 1], dq[3 * i + 2]);
            if dx != 0.0 || dy != 0.0 || dt != 0.0 {
                b.pos += Vec2::new(dx, dy);
                b.angle += dt;
                b.refresh();
            }
        }
    }
}
