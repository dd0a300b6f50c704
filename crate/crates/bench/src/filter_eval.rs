//! Necessary-condition evaluation: every collision-free candidate of every
//! scene is judged by the filters and by the squeeze simulator, and the two
//! verdicts are cross-tabulated per grasp class.

use mograsp::filters::{grasp_failure, Rejection};
use mograsp::planner::{gen_grasp_cands, PlannerConfig};
use mograsp::sim::{simulate_squeeze, SimParams};
use mograsp::{Gripper, ObjectGroup, Scene};
use rayon::prelude::*;
use serde::Serialize;

use crate::objects::ObjectLibrary;
use crate::scenes::{gen_scene, GenError, SceneSpec};

#[derive(Debug, Clone, Serialize)]
pub struct CandidateRow {
    pub class: usize,
    pub scene: usize,
    pub candidate: usize,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub rejected_by: Rejection,
    pub h_0: Option<f64>,
    pub h_f_min: f64,
    pub total_area: f64,
    pub sim_success: bool,
}

impl CandidateRow {
    pub fn false_negative(&self) -> bool {
        self.rejected_by != Rejection::None && self.sim_success
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ClassSummary {
    pub class: usize,
    pub scenes: usize,
    pub candidates: usize,
    pub sim_successes: usize,
    /// Candidates the simulator rejects.
    pub true_negatives: usize,
    pub predicted_by_area: usize,
    pub predicted_by_diameter: usize,
    pub predicted_by_both: usize,
    pub false_negatives: usize,
}

impl ClassSummary {
    fn add(&mut self, r: &CandidateRow) {
        self.candidates += 1;
        if r.sim_success {
            self.sim_successes += 1;
            if r.false_negative() {
                self.false_negatives += 1;
            }
            return;
        }
        self.true_negatives += 1;
        match r.rejected_by {
            Rejection::IntersectionArea => self.predicted_by_area += 1,
            Rejection::Diameter => self.predicted_by_diameter += 1,
            Rejection::Both => self.predicted_by_both += 1,
            Rejection::None => {}
        }
    }

    fn ratio(&self, n: usize) -> f64 {
        if self.true_negatives == 0 {
            0.0
        } else {
            n as f64 / self.true_negatives as f64
        }
    }

    /// Share of simulator failures predicted by either condition.
    pub fn coverage(&self) -> f64 {
        self.ratio(self.predicted_by_area + self.predicted_by_diameter + self.predicted_by_both)
    }

    /// Share of simulator failures predicted by the area condition, alone
    /// or together with the diameter condition.
    pub fn area_share(&self) -> f64 {
        self.ratio(self.predicted_by_area + self.predicted_by_both)
    }

    pub fn diameter_share(&self) -> f64 {
        self.ratio(self.predicted_by_diameter + self.predicted_by_both)
    }
}

#[derive(Debug, Clone)]
pub struct FilterEvalConfig {
    pub classes: Vec<usize>,
    pub scenes_per_class: usize,
    pub seed: u64,
    pub gripper: Gripper,
    pub sim: SimParams,
    pub planner: PlannerConfig,
}

#[derive(Debug, Clone)]
pub struct FilterEvalReport {
    pub rows: Vec<CandidateRow>,
    pub classes: Vec<ClassSummary>,
    pub total: ClassSummary,
}

/// Seed of scene `index` of class `class`, shared by every experiment.
pub fn scene_seed(base: u64, class: usize, index: usize) -> u64 {
    base.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((class as u64) << 32 | index as u64)
}

pub fn class_scene(
    library: &ObjectLibrary,
    gripper: &Gripper,
    base: u64,
    class: usize,
    index: usize,
) -> Result<Scene, GenError> {
    gen_scene(&SceneSpec::grasp_class(class, gripper, scene_seed(base, class, index)), library, gripper)
}

/// Judges every candidate of one scene with both the filters and the
/// simulator. The group is the whole scene.
pub fn eval_scene(
    scene: &Scene,
    class: usize,
    index: usize,
    cfg: &FilterEvalConfig,
    planner_seed: u64,
) -> Vec<CandidateRow> {
    let group = ObjectGroup::all(scene).expect("generated scenes are nonempty");
    let planner = PlannerConfig { rng_seed: planner_seed, ..cfg.planner };
    gen_grasp_cands(scene, &group, &cfg.gripper, &planner)
        .into_iter()
        .enumerate()
        .map(|(i, g)| {
            let v = grasp_failure(scene, &group, &g, &cfg.gripper).expect("group ids come from the scene");
            let sim_success =
                simulate_squeeze(scene, &group, &g, &cfg.gripper, &cfg.sim).map(|o| o.success).unwrap_or(false);
            CandidateRow {
                class,
                scene: index,
                candidate: i,
                x: g.pose.x,
                y: g.pose.y,
                theta: g.pose.theta,
                rejected_by: v.rejected_by,
                h_0: v.h_0,
                h_f_min: v.h_f_min,
                total_area: v.total_area(),
                sim_success,
            }
        })
        .collect()
}

pub fn run_filter_eval(cfg: &FilterEvalConfig, library: &ObjectLibrary) -> Result<FilterEvalReport, GenError> {
    let jobs: Vec<(usize, usize)> =
        cfg.classes.iter().flat_map(|&c| (0..cfg.scenes_per_class).map(move |i| (c, i))).collect();
    let per_scene: Vec<Vec<CandidateRow>> = jobs
        .par_iter()
        .map(|&(c, i)| {
            let scene = class_scene(library, &cfg.gripper, cfg.seed, c, i)?;
            Ok(eval_scene(&scene, c, i, cfg, scene_seed(cfg.seed, c, i)))
        })
        .collect::<Result<_, GenError>>()?;
    let rows: Vec<CandidateRow> = per_scene.into_iter().flatten().collect();
    let mut classes: Vec<ClassSummary> = cfg
        .classes
        .iter()
        .map(|&c| ClassSummary { class: c, scenes: cfg.scenes_per_class, ..Default::default() })
        .collect();
    let mut total = ClassSummary { class: 0, scenes: cfg.scenes_per_class * cfg.classes.len(), ..Default::default() };
    for r in &rows {
        if let Some(s) = classes.iter_mut().find(|s| s.class == r.class) {
            s.add(r);
        }
        total.add(r);
    }
    Ok(FilterEvalReport { rows, classes, total })
}
