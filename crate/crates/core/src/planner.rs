//! Grasp planning for an object group: sample candidates over the group's
//! convex hull, rank them by how much of the group lies between the jaws, and
//! test them in order, rejecting inadmissible ones before any simulation.
//!
//! Three unfiltered or unranked baselines share the same candidate set so
//! that their costs are directly comparable.

use std::f64::consts::PI;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::filters::{self, FilterVerdict};
use crate::geometry::{convex_hull, overlaps, ConvexPolygon, Point2, Vec2};
use crate::grasping::{self, Grasp, Gripper};
use crate::scene::{ObjectGroup, Scene};
use crate::sim::{self, SimParams, SqueezeOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// Rank, filter, then simulate.
    #[serde(rename = "GP")]
    Gp,
    RandPhys,
    RankPhys,
    RandFilPhys,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Gp, Strategy::RandPhys, Strategy::RankPhys, Strategy::RandFilPhys];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Gp => "GP",
            Strategy::RandPhys => "RandPhys",
            Strategy::RankPhys => "RankPhys",
            Strategy::RandFilPhys => "RandFilPhys",
        }
    }

    pub fn ranks(self) -> bool {
        matches!(self, Strategy::Gp | Strategy::RankPhys)
    }

    pub fn filters(self) -> bool {
        matches!(self, Strategy::Gp | Strategy::RandFilPhys)
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown strategy `{s}` (expected GP, RandPhys, RankPhys or RandFilPhys)"))
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    pub n_positions: usize,
    pub n_orientations: usize,
    pub strategy: Strategy,
    pub rng_seed: u64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig { n_positions: 70, n_orientations: 7, strategy: Strategy::Gp, rng_seed: 0 }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), &'static str> {
        if self.n_positions == 0 || self.n_orientations == 0 {
            return Err("n_positions and n_orientations must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanResult {
    pub grasp: Option<Grasp>,
    pub tested_in_sim: usize,
    pub filtered_out: usize,
    pub candidates_total: usize,
    /// Wall-clock seconds spent in [`plan_grasp`].
    pub planning_time: f64,
    /// Projection sweeps spent by all simulations, a deterministic cost.
    pub sim_iterations: u64,
    /// Simulation of the returned grasp.
    #[serde(skip)]
    pub outcome: Option<SqueezeOutcome>,
}

/// Positions covering the convex hull of the group: a grid with a random
/// offset, refined until it has at least `n` points inside the hull, then
/// thinned to exactly `n` evenly spread points.
pub fn sample_positions(hull: &ConvexPolygon, n: usize, rng: &mut impl Rng) -> Vec<Point2> {
    let (lo, hi) = hull.aabb();
    let jitter = Vec2::new(rng.gen::<f64>(), rng.gen::<f64>());
    let mut spacing = (hull.area() / n as f64).sqrt();
    let mut inside = Vec::new();
    for _ in 0..64 {
        inside.clear();
        let origin = lo + jitter * spacing;
        let nx = ((hi.x - origin.x) / spacing).floor() as i64 + 1;
        let ny = ((hi.y - origin.y) / spacing).floor() as i64 + 1;
        for j in 0..ny.max(0) {
            for i in 0..nx.max(0) {
                let p = origin + Vec2::new(i as f64 * spacing, j as f64 * spacing);
                if hull.contains(p) {
                    inside.push(p);
                }
            }
        }
        if inside.len() >= n {
            break;
        }
        spacing *= 0.85;
    }
    if inside.is_empty() {
        return vec![hull.centroid(); n];
    }
    let m = inside.len();
    (0..n).map(|k| inside[k * m / n]).collect()
}

fn group_hull(scene: &Scene, group: &ObjectGroup) -> Option<ConvexPolygon> {
    let pts: Vec<Point2> =
        group.objects(scene).ok()?.into_iter().flat_map(|o| o.world_polygon().vertices().to_vec()).collect();
    convex_hull(&pts).ok()
}

/// Whether the open jaws at `grasp` would overlap any object in the scene.
pub fn jaws_collide(scene: &Scene, grasp: &Grasp, gripper: &Gripper, world_polys: &[ConvexPolygon]) -> bool {
    let jaws = gripper.jaws_local(gripper.w_max).map(|j| j.transform(&grasp.pose));
    debug_assert_eq!(world_polys.len(), scene.len());
    jaws.iter().any(|j| world_polys.iter().any(|o| overlaps(j, o)))
}

/// Candidate grasps for `group`, in (position, orientation) sample order,
/// without those whose open jaws hit an object.
pub fn gen_grasp_cands(scene: &Scene, group: &ObjectGroup, gripper: &Gripper, config: &PlannerConfig) -> Vec<Grasp> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    sample_candidates(scene, group, gripper, config, &mut rng).0
}

/// Returns the collision-free candidates and the number sampled.
fn sample_candidates(
    scene: &Scene,
    group: &ObjectGroup,
    gripper: &Gripper,
    config: &PlannerConfig,
    rng: &mut ChaCha8Rng,
) -> (Vec<Grasp>, usize) {
    let Some(hull) = group_hull(scene, group) else { return (Vec::new(), 0) };
    let positions = sample_positions(&hull, config.n_positions, rng);
    let world_polys: Vec<ConvexPolygon> = scene.objects().iter().map(|o| o.world_polygon()).collect();
    let mut out = Vec::new();
    for p in &positions {
        for j in 0..config.n_orientations {
            let g = Grasp::new(p.x, p.y, j as f64 * PI / config.n_orientations as f64);
            if !jaws_collide(scene, &g, gripper, &world_polys) {
                out.push(g);
            }
        }
    }
    (out, positions.len() * config.n_orientations)
}

/// Total area of the group between the open jaws, `A_T`.
pub fn total_intersection_area(scene: &Scene, group: &ObjectGroup, grasp: &Grasp, gripper: &Gripper) -> f64 {
    grasping::intersection_areas(scene, group, grasp, gripper).map_or(0.0, |a| a.iter().sum())
}

/// Sorts candidates by descending `A_T`; equal areas keep their input order.
pub fn rank_grasp_cands(cands: &[Grasp], scene: &Scene, group: &ObjectGroup, gripper: &Gripper) -> Vec<Grasp> {
    let mut keyed: Vec<(f64, Grasp)> =
        cands.iter().map(|g| (total_intersection_area(scene, group, g, gripper), *g)).collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0));
    keyed.into_iter().map(|(_, g)| g).collect()
}

struct Prepared {
    grasp: Grasp,
    verdict: Option<FilterVerdict>,
    area: f64,
}

/// Searches for a grasp of `group` that the simulator confirms.
pub fn plan_grasp(
    scene: &Scene,
    group: &ObjectGroup,
    gripper: &Gripper,
    config: &PlannerConfig,
    sim_params: &SimParams,
) -> PlanResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let (cands, _) = sample_candidates(scene, group, gripper, config, &mut rng);
    let strategy = config.strategy;
    let h_f_min = if strategy.filters() {
        grasping::group_min_multi_diameter(scene, group).unwrap_or(f64::INFINITY)
    } else {
        0.0
    };

    let mut prepared: Vec<Prepared> = cands
        .iter()
        .map(|g| {
            if !(strategy.ranks() || strategy.filters()) {
                return Prepared { grasp: *g, verdict: None, area: 0.0 };
            }
            let inter = grasping::region_intersections(scene, group, g, gripper).unwrap_or_default();
            let area = inter.iter().flatten().map(|p| p.area()).sum();
            let verdict = strategy.filters().then(|| filters::verdict_from_intersections(&inter, h_f_min, gripper));
            Prepared { grasp: *g, verdict, area }
        })
        .collect();
    if strategy.ranks() {
        prepared.sort_by(|a, b| b.area.total_cmp(&a.area));
    } else {
        prepared.shuffle(&mut rng);
    }

    let mut result = PlanResult {
        grasp: None,
        tested_in_sim: 0,
        filtered_out: 0,
        candidates_total: cands.len(),
        planning_time: 0.0,
        sim_iterations: 0,
        outcome: None,
    };
    for c in prepared {
        if let Some(v) = &c.verdict {
            if !v.admissible {
                result.filtered_out += 1;
                continue;
            }
        }
        result.tested_in_sim += 1;
        match sim::simulate_squeeze(scene, group, &c.grasp, gripper, sim_params) {
            Ok(out) => {
                result.sim_iterations += out.iterations;
                if out.success {
                    result.grasp = Some(c.grasp);
                    result.outcome = Some(out);
                    break;
                }
            }
            Err(_) => continue,
        }
    }
    result.planning_time = start.elapsed().as_secs_f64();
    result
}
