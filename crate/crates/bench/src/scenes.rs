//! Random scene generation.
//!
//! Grasp-class scenes hold `k` objects laid out roughly in a row so that a
//! single push-grasp can plausibly collect all of them. Clutter scenes
//! scatter the whole library over a small table area.

use std::f64::consts::PI;

use mograsp::geometry::{distance, ConvexPolygon, Pose2, Vec2};
use mograsp::grasping::{enumerate_antipodal_diameters, min_final_diameter};
use mograsp::{Gripper, Scene};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::objects::ObjectLibrary;

pub const MAX_REJECTIONS: usize = 10_000;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GenError {
    #[error("no valid placement found after {0} attempts")]
    PlacementFailed(usize),
    #[error("no {0} library objects fit side by side in the gripper")]
    GroupTooLarge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub n_objects: usize,
    /// Side lengths of the placement rectangle, centred on the origin.
    pub region: (f64, f64),
    pub min_separation: f64,
    /// Largest extra gap between neighbours along the row.
    pub max_gap: f64,
    /// Largest sideways offset of a row member from the row axis.
    pub lateral_spread: f64,
    /// Largest deviation of a member's narrowest direction from the row
    /// axis, in radians.
    pub orientation_jitter: f64,
    pub rng_seed: u64,
}

impl SceneSpec {
    /// Row layout for a `k`-object grasp class. Gaps shrink with `k` so that
    /// the row still fits between the open jaws.
    pub fn grasp_class(k: usize, gripper: &Gripper, rng_seed: u64) -> Self {
        let slack = 0.25 * gripper.w_max / k.saturating_sub(1).max(1) as f64;
        SceneSpec {
            n_objects: k,
            region: (0.3, 0.3),
            min_separation: 0.001,
            max_gap: slack.min(0.006),
            lateral_spread: 0.15 * gripper.jaw_length,
            orientation_jitter: 0.1,
            rng_seed,
        }
    }
}

fn fits(placed: &[ConvexPolygon], cand: &ConvexPolygon, region: (f64, f64), min_sep: f64) -> bool {
    let (lo, hi) = cand.aabb();
    let (hx, hy) = (0.5 * region.0, 0.5 * region.1);
    if lo.x < -hx || lo.y < -hy || hi.x > hx || hi.y > hy {
        return false;
    }
    placed.iter().all(|p| distance(p, cand) >= min_sep)
}

/// Picks `k` library indices whose minimum widths sum to at most `budget`,
/// uniformly among the choices that keep the remainder feasible.
fn choose_members(widths: &[f64], k: usize, budget: f64, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut used = 0.0;
    for slot in 0..k {
        let left = k - slot - 1;
        let options: Vec<usize> = (0..widths.len())
            .filter(|i| !chosen.contains(i))
            .filter(|&i| {
                let mut rest: Vec<f64> =
                    (0..widths.len()).filter(|j| *j != i && !chosen.contains(j)).map(|j| widths[j]).collect();
                rest.sort_by(f64::total_cmp);
                used + widths[i] + rest.iter().take(left).sum::<f64>() <= budget
            })
            .collect();
        let &pick = options.choose(rng)?;
        used += widths[pick];
        chosen.push(pick);
    }
    Some(chosen)
}

/// Direction of a shape's narrowest stable grasp, as an angle in its own
/// frame.
fn narrow_angle(shape: &ConvexPolygon) -> f64 {
    let set = enumerate_antipodal_diameters(shape);
    let d =
        set.diameters.iter().min_by(|a, b| a.value.total_cmp(&b.value)).expect("every convex polygon has a diameter");
    d.direction.y.atan2(d.direction.x)
}

/// A scene of `spec.n_objects` library objects in a jittered row whose
/// members' minimum widths together fit within the gripper opening. Each
/// member is turned so that its narrowest side roughly faces along the row,
/// and the row is no longer than the opening.
pub fn gen_scene(spec: &SceneSpec, library: &ObjectLibrary, gripper: &Gripper) -> Result<Scene, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let widths: Vec<f64> = library.shapes.iter().map(min_final_diameter).collect();
    let budget = 0.8 * gripper.w_max - spec.n_objects.saturating_sub(1) as f64 * spec.min_separation;
    let mut members = Vec::new();
    let mut narrow = Vec::new();

    for attempt in 0..MAX_REJECTIONS {
        // A member set that keeps producing overlong rows is replaced.
        if attempt % 100 == 0 {
            members = choose_members(&widths, spec.n_objects, budget, &mut rng)
                .ok_or(GenError::GroupTooLarge(spec.n_objects))?;
            narrow = members.iter().map(|&m| narrow_angle(&library.shapes[m])).collect();
        }
        let axis_angle = rng.gen_range(0.0..PI);
        let axis = Vec2::from_angle(axis_angle);
        let side = axis.perp();
        let mut placed: Vec<(usize, Pose2, ConvexPolygon)> = Vec::new();
        let mut cursor = 0.0;
        for (&m, &a) in members.iter().zip(&narrow) {
            let shape = &library.shapes[m];
            let flip = if rng.gen_bool(0.5) { PI } else { 0.0 };
            let theta = axis_angle - a + flip + rng.gen_range(-spec.orientation_jitter..=spec.orientation_jitter);
            let rotated = shape.transform(&Pose2::new(0.0, 0.0, theta));
            let (lo, hi) = rotated.project(axis);
            let along = if placed.is_empty() {
                -lo
            } else {
                cursor + spec.min_separation + rng.gen_range(0.0..=spec.max_gap) - lo
            };
            cursor = along + hi;
            let lateral = rng.gen_range(-spec.lateral_spread..=spec.lateral_spread);
            let c = axis * along + side * lateral;
            placed.push((m, Pose2::new(c.x, c.y, theta), rotated.translate(c)));
        }
        if cursor > gripper.w_max {
            continue;
        }
        // Centre the row at a random point of the region.
        let (hx, hy) = (0.5 * spec.region.0, 0.5 * spec.region.1);
        let centre = Vec2::new(rng.gen_range(-hx..=hx), rng.gen_range(-hy..=hy)) - axis * (0.5 * cursor);
        let mut polys: Vec<ConvexPolygon> = Vec::with_capacity(placed.len());
        let mut ok = true;
        for (_, pose, poly) in &mut placed {
            *pose = Pose2::new(pose.x + centre.x, pose.y + centre.y, pose.theta);
            *poly = poly.translate(centre);
            if !fits(&polys, poly, spec.region, spec.min_separation) {
                ok = false;
                break;
            }
            polys.push(poly.clone());
        }
        if ok {
            return Ok(Scene::from_shapes(placed.into_iter().map(|(m, pose, _)| (library.shapes[m].clone(), pose))));
        }
    }
    Err(GenError::PlacementFailed(MAX_REJECTIONS))
}

/// The whole library dropped one object at a time at uniform random poses
/// in a `side` x `side` square, keeping `min_separation` between objects.
pub fn gen_clutter_scene(
    library: &ObjectLibrary,
    side: f64,
    min_separation: f64,
    seed: u64,
) -> Result<Scene, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..library.shapes.len()).collect();
    order.shuffle(&mut rng);
    let h = 0.5 * side;
    let mut polys: Vec<ConvexPolygon> = Vec::new();
    let mut items = Vec::new();
    for m in order {
        let shape = &library.shapes[m];
        let mut done = false;
        for _ in 0..MAX_REJECTIONS {
            let pose = Pose2::new(rng.gen_range(-h..h), rng.gen_range(-h..h), rng.gen_range(-PI..PI));
            let poly = shape.transform(&pose);
            if fits(&polys, &poly, (side, side), min_separation) {
                polys.push(poly);
                items.push((shape.clone(), pose));
                done = true;
                break;
            }
        }
        if !done {
            return Err(GenError::PlacementFailed(MAX_REJECTIONS));
        }
    }
    Ok(Scene::from_shapes(items))
}
