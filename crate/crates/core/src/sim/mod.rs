//! Frictionless quasi-static squeeze simulation.
//!
//! The jaws close symmetrically about the grasp pose in small increments.
//! After each increment, penetrations are removed by position projection:
//! free objects translate along contact normals and rotate about their
//! centroids, jaws never yield. When an increment cannot be resolved the
//! gripper has jammed against a rigid chain of objects; the final opening is
//! then refined by bisection. Success is decided from the rest state alone:
//! every group member must sit in a jaw-to-jaw chain of contacts whose normals
//! are parallel to the closing axis and share one line of action.

mod contact;
mod qp;
mod world;

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::geometry::{intersection_area, ConvexPolygon, Point2, Pose2, Vec2, MIN_AREA};
use crate::grasping::{Grasp, Gripper};
use crate::scene::{ObjectGroup, Scene, SceneError};

use world::{Fixed, World};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("objects overlap at the start by {depth:.3e} m")]
    InitialPenetration { depth: f64 },
    #[error("contact projection did not converge (residual {residual:.3e} m)")]
    NonConvergent { residual: f64 },
    #[error("invalid simulation parameters: {0}")]
    InvalidParams(&'static str),
    #[error(transparent)]
    Scene(#[from] SceneError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimParams {
    /// Opening decrement per increment, in meters.
    pub jaw_step: f64,
    pub penetration_tol: f64,
    pub max_projection_iters: usize,
    /// Angular tolerance for antipodal and axis-parallel normals, radians.
    pub angle_tol: f64,
    /// Allowed offset between the lines of action of opposing contacts, and
    /// the margin of the jaw sweep band used for escapes.
    pub escape_margin: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            jaw_step: 5e-4,
            penetration_tol: 1e-6,
            max_projection_iters: 200,
            angle_tol: 1e-3,
            escape_margin: 1e-3,
        }
    }
}

impl SimParams {
    pub fn validate(&self, gripper: &Gripper) -> Result<(), SimError> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !(pos(self.jaw_step) && pos(self.penetration_tol) && pos(self.angle_tol) && pos(self.escape_margin)) {
            return Err(SimError::InvalidParams("tolerances and step must be positive"));
        }
        if self.max_projection_iters == 0 {
            return Err(SimError::InvalidParams("max_projection_iters must be positive"));
        }
        if self.jaw_step >= gripper.w_max / 10.0 {
            return Err(SimError::InvalidParams("jaw_step must be below w_max / 10"));
        }
        Ok(())
    }

    /// Proximity within which bodies count as touching in the rest state.
    fn contact_slop(&self) -> f64 {
        10.0 * self.penetration_tol
    }

    /// Tolerance for the final rest state, tighter than the per-increment one
    /// so that chain lengths add up to the jaw opening.
    fn settle_tol(&self) -> f64 {
        self.penetration_tol * 1e-3
    }
}

/// Participant in a contact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BodyRef {
    Object(usize),
    LeftJaw,
    RightJaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    pub body_a: BodyRef,
    pub body_b: BodyRef,
    /// Midpoint of the contact patch.
    pub point: Point2,
    /// Unit normal from `body_a` into `body_b`.
    pub normal: Vec2,
    pub depth: f64,
    /// Ends of the contact patch; equal for a point contact.
    pub extent: [Point2; 2],
}

impl Contact {
    /// The normal as seen by `body`, pointing into it. `None` when `body` is
    /// not part of this contact.
    pub fn inward_normal(&self, body: BodyRef) -> Option<Vec2> {
        if self.body_b == body {
            Some(self.normal)
        } else if self.body_a == body {
            Some(-self.normal)
        } else {
            None
        }
    }

    fn other(&self, body: BodyRef) -> BodyRef {
        if self.body_a == body {
            self.body_b
        } else {
            self.body_a
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezeOutcome {
    pub success: bool,
    pub final_state: Scene,
    pub initial_opening: f64,
    pub final_opening: f64,
    /// Objects held in equilibrium between the jaws, including non-group ones.
    pub grasped: BTreeSet<usize>,
    /// Group members that left the jaw sweep band or the final region.
    pub escaped: BTreeSet<usize>,
    pub contacts: Vec<Contact>,
    /// Accepted closing increments.
    pub steps: usize,
    /// Projection sweeps spent, a machine-independent cost measure.
    pub iterations: u64,
    /// Width along the closing axis of every grasped object at rest.
    pub final_widths: Vec<(usize, f64)>,
    pub jammed: bool,
}

/// One keyframe of a squeeze, in world coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFrame {
    pub step: usize,
    pub opening: f64,
    pub poses: Vec<(usize, Pose2)>,
    pub contacts: Vec<Contact>,
}

/// Writes frames as JSON lines.
pub fn write_trace(frames: &[TraceFrame], mut out: impl Write) -> std::io::Result<()> {
    for f in frames {
        serde_json::to_writer(&mut out, f)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trace(text: &str) -> Result<Vec<TraceFrame>, serde_json::Error> {
    text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect()
}

/// Extra bisection passes with a small increment after the first jam.
const JAM_REFINE_PASSES: usize = 8;

struct Squeeze<'a> {
    gripper: &'a Gripper,
    params: &'a SimParams,
    world: World,
    opening: f64,
    iterations: u64,
}

impl Squeeze<'_> {
    fn set_opening(world: &mut World, gripper: &Gripper, opening: f64) {
        let [l, r] = gripper.jaws_local(opening.max(0.0));
        world.fixed = vec![Fixed::new(BodyRef::LeftJaw, &l), Fixed::new(BodyRef::RightJaw, &r)];
    }

    /// Free travel of each jaw before it can touch anything, in the grasp frame.
    fn free_travel(&self) -> f64 {
        let hl = 0.5 * self.gripper.jaw_length;
        let hw = 0.5 * self.opening;
        let t = self.gripper.jaw_thickness;
        let mut gap = hw; // jaws meet at the centre
        for b in &self.world.bodies {
            if b.hi.y < -hl || b.lo.y > hl {
                continue;
            }
            let Some(slice) = b
                .polygon()
                .clip_halfplane(Vec2::new(0.0, hl), Vec2::Y)
                .and_then(|p| p.clip_halfplane(Vec2::new(0.0, -hl), -Vec2::Y))
            else {
                // Only a sliver inside the band: no jumping past it.
                return 0.0;
            };
            let (lo, hi) = slice.project(Vec2::X);
            if hi > -hw - t {
                gap = gap.min(lo + hw);
            }
            if lo < hw + t {
                gap = gap.min(hw - hi);
            }
        }
        gap.max(0.0)
    }

    fn try_opening(&self, opening: f64, tol: f64, iters: usize) -> (World, bool, u64) {
        let mut w = self.world.clone();
        Self::set_opening(&mut w, self.gripper, opening);
        let rep = w.project(tol, iters, self.params.jaw_step);
        (w, rep.converged, rep.iterations as u64)
    }

    /// Bisects the closing increment `step` for the tightest opening that
    /// still resolves to the settle tolerance, moves there, and returns how
    /// far the jaws closed.
    fn settle_into_jam(&mut self, step: f64) -> f64 {
        let p = self.params;
        let (mut lo, mut hi) = (0.0, step.min(self.opening));
        let mut best: Option<World> = None;
        let fine_iters = 10 * p.max_projection_iters;
        for _ in 0..24 {
            let mid = 0.5 * (lo + hi);
            let (w, ok, its) = self.try_opening(self.opening - mid, p.settle_tol(), fine_iters);
            self.iterations += its;
            if ok {
                lo = mid;
                best = Some(w);
            } else {
                hi = mid;
            }
            if hi - lo < 1e-3 * p.penetration_tol {
                break;
            }
        }
        match best {
            Some(w) => {
                self.world = w;
                self.opening -= lo;
                lo
            }
            None => {
                let (w, ok, its) = self.try_opening(self.opening, p.settle_tol(), fine_iters);
                self.iterations += its;
                if ok {
                    self.world = w;
                }
                0.0
            }
        }
    }

    /// Closes the jaws until they jam or meet. Returns whether a jam occurred.
    fn close(&mut self, mut on_step: impl FnMut(&World, usize, f64)) -> Result<(bool, usize), SimError> {
        let p = self.params;
        let max_steps = (4.0 * self.opening / p.jaw_step) as usize + 10_000;
        let mut steps = 0;
        while self.opening > 0.0 {
            if steps > max_steps {
                return Err(SimError::NonConvergent { residual: f64::NAN });
            }
            let travel = self.free_travel() - p.contact_slop();
            if 2.0 * travel > p.jaw_step {
                // Nothing can move until a jaw reaches an object.
                self.opening = (self.opening - 2.0 * travel).max(0.0);
                Self::set_opening(&mut self.world, self.gripper, self.opening);
                steps += 1;
                on_step(&self.world, steps, self.opening);
                continue;
            }
            let step = p.jaw_step.min(self.opening);
            let (w, ok, its) = self.try_opening(self.opening - step, p.penetration_tol, p.max_projection_iters);
            self.iterations += its;
            if ok {
                self.world = w;
                self.opening -= step;
                steps += 1;
                on_step(&self.world, steps, self.opening);
                continue;
            }
            // Jammed inside this increment. Bisect for the tightest opening
            // that still resolves, then keep bisecting from each new rest
            // state with a much smaller increment: a part wedged at a slight
            // angle can often still slide a little further, but not within
            // one large linearised step.
            let mut advanced = self.settle_into_jam(step);
            for _ in 0..JAM_REFINE_PASSES {
                if advanced < 1e-3 * p.penetration_tol {
                    break;
                }
                advanced = self.settle_into_jam(p.contact_slop());
            }
            steps += 1;
            on_step(&self.world, steps, self.opening);
            return Ok((true, steps));
        }
        Ok((false, steps))
    }
}

fn public_contacts(world: &World, slop: f64, frame_inv: &Pose2) -> Vec<Contact> {
    world
        .contacts(slop)
        .into_iter()
        .map(|c| {
            let pts = c.manifold.points();
            let e0 = pts[0].point;
            let e1 = pts[pts.len() - 1].point;
            Contact {
                body_a: c.a,
                body_b: c.b,
                point: frame_inv.apply((e0 + e1) * 0.5),
                normal: frame_inv.apply_dir(c.manifold.normal),
                depth: c.manifold.max_depth().max(0.0),
                extent: [frame_inv.apply(e0), frame_inv.apply(e1)],
            }
        })
        .collect()
}

fn is_axial(n: Vec2, axis: Vec2, angle_tol: f64) -> bool {
    n.cross(axis).abs() <= angle_tol.sin()
}

/// Objects reachable from both jaws through contacts whose normals lie along
/// the closing axis, each contact pushing away from the jaw it is reached
/// from.
fn jaw_chain(contacts: &[Contact], axis: Vec2, angle_tol: f64) -> BTreeSet<usize> {
    let axial: Vec<&Contact> = contacts.iter().filter(|c| is_axial(c.normal, axis, angle_tol)).collect();
    let reach = |start: BodyRef, sign: f64| -> BTreeSet<BodyRef> {
        let mut seen = BTreeSet::from([start]);
        let mut frontier = vec![start];
        while let Some(cur) = frontier.pop() {
            for c in &axial {
                let Some(_) = c.inward_normal(cur) else { continue };
                let next = c.other(cur);
                // The neighbour must be pushed along +sign·axis by `cur`.
                let Some(n_next) = c.inward_normal(next) else { continue };
                if sign * n_next.dot(axis) > 0.0 && matches!(next, BodyRef::Object(_)) && seen.insert(next) {
                    frontier.push(next);
                }
            }
        }
        seen
    };
    let from_left = reach(BodyRef::LeftJaw, 1.0);
    let from_right = reach(BodyRef::RightJaw, -1.0);
    from_left
        .intersection(&from_right)
        .filter_map(|b| match b {
            BodyRef::Object(id) => Some(*id),
            _ => None,
        })
        .collect()
}

/// Interval of contact-patch offsets perpendicular to the closing axis.
fn lateral_interval(c: &Contact, perp: Vec2) -> (f64, f64) {
    let a = c.extent[0].dot(perp);
    let b = c.extent[1].dot(perp);
    (a.min(b), a.max(b))
}

fn object_equilibrium(id: usize, contacts: &[&Contact], axis: Vec2, params: &SimParams) -> Option<(f64, f64)> {
    let me = BodyRef::Object(id);
    let perp = axis.perp();
    let tol = params.angle_tol;
    let mut left: Option<(f64, f64)> = None;
    let mut right: Option<(f64, f64)> = None;
    let mut n_left = Vec2::ZERO;
    let mut n_right = Vec2::ZERO;
    let merge = |acc: Option<(f64, f64)>, iv: (f64, f64)| Some(acc.map_or(iv, |(a, b)| (a.min(iv.0), b.max(iv.1))));
    for c in contacts {
        let Some(n) = c.inward_normal(me) else { continue };
        if !is_axial(n, axis, tol) {
            continue;
        }
        let iv = lateral_interval(c, perp);
        if n.dot(axis) > 0.0 {
            left = merge(left, iv);
            n_left = n;
        } else {
            right = merge(right, iv);
            n_right = n;
        }
    }
    let (l, r) = (left?, right?);
    // Opposing normals must be antiparallel.
    if n_left.cross(-n_right).abs() > tol.sin() || n_left.dot(-n_right) <= 0.0 {
        return None;
    }
    // The two patches must admit a common line of action.
    let lo = l.0.max(r.0);
    let hi = l.1.min(r.1);
    (lo - hi < params.escape_margin).then_some((lo.min(hi), hi.max(lo)))
}

/// Frictionless equilibrium test at a rest state: each group member has an
/// axis-parallel antipodal contact pair whose patches share a line of action,
/// and all members share one common line.
pub fn check_equilibrium(
    state: &Scene,
    group: &ObjectGroup,
    contacts: &[Contact],
    grasp: &Grasp,
    params: &SimParams,
) -> bool {
    if group.validate(state).is_err() {
        return false;
    }
    let axis = grasp.closing_axis();
    let relevant: Vec<&Contact> = contacts.iter().collect();
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for &id in group.members() {
        match object_equilibrium(id, &relevant, axis, params) {
            Some((a, b)) => {
                lo = lo.max(a);
                hi = hi.min(b);
            }
            None => return false,
        }
    }
    lo - hi < params.escape_margin
}

/// Resolves penetrations of the scene against fixed obstacles (for example
/// jaw pads), moving only the scene objects.
pub fn resolve_contacts(scene: &Scene, obstacles: &[ConvexPolygon], params: &SimParams) -> Result<Scene, SimError> {
    let fixed = obstacles
        .iter()
        .enumerate()
        .map(|(i, p)| Fixed::new(if i % 2 == 0 { BodyRef::LeftJaw } else { BodyRef::RightJaw }, p))
        .collect();
    let mut world = World::new(scene, &Pose2::IDENTITY, fixed);
    let rep = world.project(params.penetration_tol, params.max_projection_iters, f64::INFINITY);
    if !rep.converged {
        return Err(SimError::NonConvergent { residual: rep.max_depth });
    }
    Ok(scene_from_world(scene, &world, &Pose2::IDENTITY))
}

fn scene_from_world(scene: &Scene, world: &World, frame_inv: &Pose2) -> Scene {
    let mut out = scene.clone();
    for b in &world.bodies {
        out.set_pose(b.id, b.world_pose(frame_inv)).expect("body ids come from the scene");
    }
    out
}

/// Simulates closing the gripper at `grasp` and judges whether `group` ends
/// in a stable frictionless grasp.
pub fn simulate_squeeze(
    scene: &Scene,
    group: &ObjectGroup,
    grasp: &Grasp,
    gripper: &Gripper,
    params: &SimParams,
) -> Result<SqueezeOutcome, SimError> {
    simulate_squeeze_traced(scene, group, grasp, gripper, params, None)
}

pub fn simulate_squeeze_traced(
    scene: &Scene,
    group: &ObjectGroup,
    grasp: &Grasp,
    gripper: &Gripper,
    params: &SimParams,
    mut trace: Option<&mut Vec<TraceFrame>>,
) -> Result<SqueezeOutcome, SimError> {
    params.validate(gripper)?;
    group.validate(scene)?;
    let frame = grasp.world_to_local();
    let frame_inv = grasp.pose;

    let mut world = World::new(scene, &frame, Vec::new());
    Squeeze::set_opening(&mut world, gripper, gripper.w_max);
    let (jaw_depth, body_depth) = world.max_depths();
    let initial = jaw_depth.max(body_depth);
    if initial >= params.penetration_tol {
        return Err(SimError::InitialPenetration { depth: initial });
    }

    let mut sq = Squeeze { gripper, params, world, opening: gripper.w_max, iterations: 0 };
    let contact_slop = params.contact_slop();
    let mut record = |w: &World, step: usize, opening: f64| {
        if let Some(t) = trace.as_deref_mut() {
            t.push(TraceFrame {
                step,
                opening,
                poses: w.bodies.iter().map(|b| (b.id, b.world_pose(&frame_inv))).collect(),
                contacts: public_contacts(w, contact_slop, &frame_inv),
            });
        }
    };
    record(&sq.world, 0, sq.opening);
    let (jammed, steps) = sq.close(&mut record)?;

    let world = &sq.world;
    let final_state = scene_from_world(scene, world, &frame_inv);
    let contacts = public_contacts(world, contact_slop, &frame_inv);
    let axis = grasp.closing_axis();

    let chain = if jammed { jaw_chain(&contacts, axis, params.angle_tol) } else { BTreeSet::new() };
    let chain_contacts: Vec<&Contact> = contacts
        .iter()
        .filter(|c| {
            let inside = |b: BodyRef| match b {
                BodyRef::Object(id) => chain.contains(&id),
                _ => true,
            };
            inside(c.body_a) && inside(c.body_b)
        })
        .collect();
    let grasped: BTreeSet<usize> =
        chain.iter().copied().filter(|&id| object_equilibrium(id, &chain_contacts, axis, params).is_some()).collect();

    // Escapes: group members whose centroid left the sweep band, or that no
    // longer overlap the region between the jaws.
    let m = params.escape_margin;
    let hw = 0.5 * gripper.w_max + m;
    let hl = 0.5 * gripper.jaw_length + m;
    let in_band = |p: Point2| {
        let q = frame.apply(p);
        q.x.abs() <= hw && q.y.abs() <= hl
    };
    // Jaws that closed completely hold nothing.
    let final_region = (sq.opening > 1e-6).then(|| gripper.region_local(sq.opening).transform(&grasp.pose));
    let mut escaped = BTreeSet::new();
    let mut all_inside = true;
    for &id in group.members() {
        let before = scene.object(id)?;
        let after = final_state.object(id)?;
        let area = final_region.as_ref().map_or(0.0, |r| intersection_area(&after.world_polygon(), r));
        if area <= MIN_AREA {
            all_inside = false;
        }
        if grasped.contains(&id) {
            continue;
        }
        if area <= MIN_AREA || (in_band(before.world_centroid()) && !in_band(after.world_centroid())) {
            escaped.insert(id);
        }
    }

    let grasp_contacts: Vec<Contact> = chain_contacts.iter().map(|c| **c).collect();
    let success = jammed
        && group.members().iter().all(|id| grasped.contains(id))
        && escaped.is_empty()
        && all_inside
        && check_equilibrium(&final_state, group, &grasp_contacts, grasp, params);

    let final_widths = grasped
        .iter()
        .map(|&id| {
            let o = final_state.object(id).expect("grasped ids come from the scene");
            (id, o.world_polygon().width_along(axis))
        })
        .collect();

    Ok(SqueezeOutcome {
        success,
        final_state,
        initial_opening: gripper.w_max,
        final_opening: sq.opening,
        grasped,
        escaped,
        contacts,
        steps,
        iterations: sq.iterations,
        final_widths,
        jammed,
    })
}
