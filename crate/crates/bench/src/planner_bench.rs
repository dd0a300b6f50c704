//! Planner comparison: every strategy plans on the same grasp-class scenes
//! with the same candidate set, and the work each one does is recorded.

use mograsp::planner::{plan_grasp, PlannerConfig, Strategy};
use mograsp::sim::SimParams;
use mograsp::{Gripper, ObjectGroup};
use rayon::prelude::*;
use serde::Serialize;

use crate::filter_eval::{class_scene, scene_seed};
use crate::objects::ObjectLibrary;
use crate::scenes::GenError;
use crate::stats::{summarize, Summary};

#[derive(Debug, Clone)]
pub struct PlannerBenchConfig {
    pub classes: Vec<usize>,
    pub scenes_per_class: usize,
    pub seed: u64,
    pub strategies: Vec<Strategy>,
    pub gripper: Gripper,
    pub sim: SimParams,
    pub planner: PlannerConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlannerRow {
    pub class: usize,
    pub scene: usize,
    pub strategy: Strategy,
    pub found: bool,
    pub tested_in_sim: usize,
    pub filtered_out: usize,
    pub candidates: usize,
    /// Projection sweeps spent in the simulator: a machine-independent
    /// measure of planning cost.
    pub sim_iterations: u64,
    /// Wall-clock seconds.
    pub planning_time: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrategySummary {
    pub strategy: Strategy,
    pub scenes: usize,
    pub found: usize,
    pub tested: Summary,
    /// Tested candidates over the scenes where a grasp was found.
    pub tested_when_found: Summary,
    pub sim_iterations: Summary,
    pub planning_time: Summary,
}

#[derive(Debug, Clone)]
pub struct PlannerBenchReport {
    pub rows: Vec<PlannerRow>,
    pub strategies: Vec<StrategySummary>,
}

impl PlannerBenchReport {
    pub fn summary(&self, s: Strategy) -> Option<&StrategySummary> {
        self.strategies.iter().find(|x| x.strategy == s)
    }

    /// Mean tested candidates of `baseline` divided by that of `s`.
    pub fn tested_ratio(&self, s: Strategy, baseline: Strategy) -> Option<f64> {
        Some(self.summary(baseline)?.tested.mean / self.summary(s)?.tested.mean)
    }

    /// Mean planning time of `baseline` divided by that of `s`.
    pub fn speedup(&self, s: Strategy, baseline: Strategy) -> Option<f64> {
        Some(self.summary(baseline)?.planning_time.mean / self.summary(s)?.planning_time.mean)
    }
}

pub fn run_planner_bench(cfg: &PlannerBenchConfig, library: &ObjectLibrary) -> Result<PlannerBenchReport, GenError> {
    let jobs: Vec<(usize, usize)> =
        cfg.classes.iter().flat_map(|&c| (0..cfg.scenes_per_class).map(move |i| (c, i))).collect();
    let per_scene: Vec<Vec<PlannerRow>> = jobs
        .par_iter()
        .map(|&(class, scene)| {
            let s = class_scene(library, &cfg.gripper, cfg.seed, class, scene)?;
            let group = ObjectGroup::all(&s).expect("generated scenes are nonempty");
            let rng_seed = scene_seed(cfg.seed, class, scene);
            Ok(cfg
                .strategies
                .iter()
                .map(|&strategy| {
                    let planner = PlannerConfig { strategy, rng_seed, ..cfg.planner };
                    let r = plan_grasp(&s, &group, &cfg.gripper, &planner, &cfg.sim);
                    PlannerRow {
                        class,
                        scene,
                        strategy,
                        found: r.grasp.is_some(),
                        tested_in_sim: r.tested_in_sim,
                        filtered_out: r.filtered_out,
                        candidates: r.candidates_total,
                        sim_iterations: r.sim_iterations,
                        planning_time: r.planning_time,
                    }
                })
                .collect())
        })
        .collect::<Result<_, GenError>>()?;
    let rows: Vec<PlannerRow> = per_scene.into_iter().flatten().collect();
    let strategies = cfg
        .strategies
        .iter()
        .map(|&strategy| {
            let mine: Vec<&PlannerRow> = rows.iter().filter(|r| r.strategy == strategy).collect();
            let col = |f: &dyn Fn(&PlannerRow) -> f64| mine.iter().map(|r| f(r)).collect::<Vec<f64>>();
            let found: Vec<f64> = mine.iter().filter(|r| r.found).map(|r| r.tested_in_sim as f64).collect();
            StrategySummary {
                strategy,
                scenes: mine.len(),
                found: found.len(),
                tested: summarize(&col(&|r| r.tested_in_sim as f64)),
                tested_when_found: summarize(&found),
                sim_iterations: summarize(&col(&|r| r.sim_iterations as f64)),
                planning_time: summarize(&col(&|r| r.planning_time)),
            }
        })
        .collect();
    Ok(PlannerBenchReport { rows, strategies })
}
