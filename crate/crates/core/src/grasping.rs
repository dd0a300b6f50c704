//! Gripper and grasp model, the internal region between the jaws, antipodal
//! diameters of single polygons and the multi-object grasp diameter.
//!
//! All grasp-local quantities live in the *grasp frame*: origin at the grasp
//! position, x along the closing axis (left jaw at negative x), y along the
//! jaw pads.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::{intersect_convex, ConvexPolygon, Pose2, Vec2, EPS};
use crate::scene::{ObjectGroup, Scene, SceneError};

#[derive(Debug, thiserror::Error)]
pub enum GraspError {
    #[error("opening {opening} m outside (0, {w_max}]")]
    OpeningOutOfRange { opening: f64, w_max: f64 },
    #[error("no group object intersects the internal region")]
    EmptyIntersection,
    #[error("invalid gripper: {0}")]
    InvalidGripper(&'static str),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("gripper file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Parallel-jaw gripper geometry.
///
/// `max_force` is carried for completeness only. Outcomes of the frictionless
/// quasi-static model do not depend on force magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Gripper {
    pub w_max: f64,
    pub jaw_length: f64,
    pub jaw_thickness: f64,
    #[serde(rename = "f_g")]
    pub max_force: f64,
}

impl Default for Gripper {
    /// Robotiq 2F-85 stroke with nominal pad geometry.
    fn default() -> Self {
        Gripper { w_max: 0.085, jaw_length: 0.03, jaw_thickness: 0.01, max_force: 235.0 }
    }
}

impl Gripper {
    pub fn new(w_max: f64, jaw_length: f64, jaw_thickness: f64, max_force: f64) -> Result<Self, GraspError> {
        let g = Gripper { w_max, jaw_length, jaw_thickness, max_force };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), GraspError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.w_max) {
            return Err(GraspError::InvalidGripper("w_max must be positive"));
        }
        if !ok(self.jaw_length) {
            return Err(GraspError::InvalidGripper("jaw_length must be positive"));
        }
        if !ok(self.jaw_thickness) {
            return Err(GraspError::InvalidGripper("jaw_thickness must be positive"));
        }
        if !ok(self.max_force) {
            return Err(GraspError::InvalidGripper("f_g must be positive"));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GraspError> {
        let g: Gripper = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        g.validate()?;
        Ok(g)
    }

    /// Internal region in the grasp frame at the given opening.
    pub fn region_local(&self, opening: f64) -> ConvexPolygon {
        let hw = 0.5 * opening;
        let hl = 0.5 * self.jaw_length;
        ConvexPolygon::rectangle(-hw, -hl, hw, hl).expect("positive extents")
    }

    /// Left and right jaw pads in the grasp frame at the given opening.
    pub fn jaws_local(&self, opening: f64) -> [ConvexPolygon; 2] {
        let hw = 0.5 * opening;
        let hl = 0.5 * self.jaw_length;
        let t = self.jaw_thickness;
        [
            ConvexPolygon::rectangle(-hw - t, -hl, -hw, hl).expect("positive extents"),
            ConvexPolygon::rectangle(hw, -hl, hw + t, hl).expect("positive extents"),
        ]
    }
}

/// Gripper pose `(x_g, y_g, θ_g)`; the jaws close along the rotated x axis.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Grasp {
    pub pose: Pose2,
}

impl Grasp {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Grasp { pose: Pose2::new(x, y, theta) }
    }

    pub fn closing_axis(&self) -> Vec2 {
        Vec2::from_angle(self.pose.theta)
    }

    /// Maps world coordinates into the grasp frame.
    pub fn world_to_local(&self) -> Pose2 {
        self.pose.inverse()
    }
}

/// The rectangle between the open jaws, with the flanking jaw pads, in world
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct InternalRegion {
    pub rect: ConvexPolygon,
    pub opening: f64,
    pub left_jaw: ConvexPolygon,
    pub right_jaw: ConvexPolygon,
}

pub fn internal_region(gripper: &Gripper, grasp: &Grasp, opening: f64) -> Result<InternalRegion, GraspError> {
    if !(opening > 0.0 && opening <= gripper.w_max + EPS) {
        return Err(GraspError::OpeningOutOfRange { opening, w_max: gripper.w_max });
    }
    let (hw, hl) = (0.5 * opening, 0.5 * gripper.jaw_length);
    // Openings too narrow to enclose any area count as out of range.
    let rect = ConvexPolygon::rectangle(-hw, -hl, hw, hl)
        .map_err(|_| GraspError::OpeningOutOfRange { opening, w_max: gripper.w_max })?;
    let [l, r] = gripper.jaws_local(opening);
    Ok(InternalRegion {
        rect: rect.transform(&grasp.pose),
        opening,
        left_jaw: l.transform(&grasp.pose),
        right_jaw: r.transform(&grasp.pose),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiameterKind {
    ParallelEdges,
    VertexEdge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diameter {
    pub value: f64,
    pub kind: DiameterKind,
    /// Unit direction along which the jaws close for this configuration.
    pub direction: Vec2,
}

/// All frictionless final diameters of one polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterSet {
    pub diameters: Vec<Diameter>,
}

impl DiameterSet {
    pub fn min(&self) -> f64 {
        self.diameters.iter().map(|d| d.value).fold(f64::INFINITY, f64::min)
    }

    pub fn len(&self) -> usize {
        self.diameters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diameters.is_empty()
    }
}

/// Enumerates the stable frictionless two-jaw grasps of a convex polygon:
/// antiparallel edge pairs whose projections overlap, and vertex-edge pairs
/// where the vertex is the unique far support point and its foot of
/// perpendicular falls strictly inside the edge. Vertex-vertex contacts are
/// unstable without friction and are not reported.
pub fn enumerate_antipodal_diameters(poly: &ConvexPolygon) -> DiameterSet {
    let n = poly.len();
    let verts = poly.vertices();
    let mut out = Vec::new();

    for i in 0..n {
        let ni = poly.edge_normal(i);
        let (a, b) = poly.edge(i);
        let t = (b - a) / (b - a).norm();
        for j in (i + 1)..n {
            let nj = poly.edge_normal(j);
            if ni.dot(nj) > -1.0 + 1e-12 || ni.cross(nj).abs() > 1e-9 {
                continue;
            }
            let (c, d) = poly.edge(j);
            let (lo_i, hi_i) = (a.dot(t).min(b.dot(t)), a.dot(t).max(b.dot(t)));
            let (lo_j, hi_j) = (c.dot(t).min(d.dot(t)), c.dot(t).max(d.dot(t)));
            if hi_i.min(hi_j) - lo_i.max(lo_j) > EPS {
                out.push(Diameter { value: ni.dot(a - c), kind: DiameterKind::ParallelEdges, direction: ni });
            }
        }
    }

    for i in 0..n {
        let ni = poly.edge_normal(i);
        let (a, b) = poly.edge(i);
        // Far support point(s) in the -n direction.
        let mut far = f64::NEG_INFINITY;
        let mut far_idx = 0;
        let mut second = f64::NEG_INFINITY;
        for (k, v) in verts.iter().enumerate() {
            let d = ni.dot(a - *v);
            if d > far {
                second = far;
                far = d;
                far_idx = k;
            } else if d > second {
                second = d;
            }
        }
        if far - second <= EPS {
            continue; // flat far side: a parallel-edge configuration
        }
        let v = verts[far_idx];
        let e = b - a;
        let s = (v - a).dot(e) / e.norm_sq();
        if s > EPS && s < 1.0 - EPS {
            out.push(Diameter { value: far, kind: DiameterKind::VertexEdge, direction: ni });
        }
    }

    DiameterSet { diameters: out }
}

/// Smallest stable single-object final diameter.
pub fn min_final_diameter(poly: &ConvexPolygon) -> f64 {
    enumerate_antipodal_diameters(poly).min()
}

/// Smallest achievable final multi-object grasp diameter: the sum of the
/// per-object minima.
pub fn min_multi_diameter<'a>(polys: impl IntoIterator<Item = &'a ConvexPolygon>) -> f64 {
    polys.into_iter().map(min_final_diameter).sum()
}

/// `h_f_min` for the group's shapes.
pub fn group_min_multi_diameter(scene: &Scene, group: &ObjectGroup) -> Result<f64, GraspError> {
    Ok(min_multi_diameter(group.objects(scene)?.into_iter().map(|o| o.shape())))
}

/// Per-member intersection with the internal region at full opening,
/// expressed in the grasp frame. `None` marks an empty intersection.
pub fn region_intersections(
    scene: &Scene,
    group: &ObjectGroup,
    grasp: &Grasp,
    gripper: &Gripper,
) -> Result<Vec<Option<ConvexPolygon>>, GraspError> {
    let to_local = grasp.world_to_local();
    let region = gripper.region_local(gripper.w_max);
    group
        .objects(scene)?
        .into_iter()
        .map(|o| {
            let local = o.shape().transform(&to_local.compose(&o.pose));
            Ok(intersect_convex(&local, &region))
        })
        .collect()
}

/// `h_0` from precomputed region intersections: the full opening minus the
/// free gaps between each jaw face and the nearest intersected material.
pub fn multi_diameter_from_intersections(
    intersections: &[Option<ConvexPolygon>],
    gripper: &Gripper,
) -> Result<f64, GraspError> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in intersections.iter().flatten() {
        let (a, b) = p.project(Vec2::X);
        lo = lo.min(a);
        hi = hi.max(b);
    }
    if lo > hi {
        return Err(GraspError::EmptyIntersection);
    }
    let half = 0.5 * gripper.w_max;
    let b_l = (lo + half).max(0.0);
    let b_r = (half - hi).max(0.0);
    Ok(gripper.w_max - (b_l + b_r))
}

/// Initial multi-object grasp diameter `h_0 = w_max - (b_l + b_r)`.
pub fn initial_multi_diameter(
    scene: &Scene,
    group: &ObjectGroup,
    grasp: &Grasp,
    gripper: &Gripper,
) -> Result<f64, GraspError> {
    multi_diameter_from_intersections(&region_intersections(scene, group, grasp, gripper)?, gripper)
}

/// `A_i(0)` for each group member, in group order.
pub fn intersection_areas(
    scene: &Scene,
    group: &ObjectGroup,
    grasp: &Grasp,
    gripper: &Gripper,
) -> Result<Vec<f64>, GraspError> {
    Ok(region_intersections(scene, group, grasp, gripper)?
        .iter()
        .map(|p| p.as_ref().map_or(0.0, |p| p.area()))
        .collect())
}
