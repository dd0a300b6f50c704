//! Table-clearing comparison between multi-object and single-object picking
//! on clustered scenes holding the whole object library.

use mograsp::picking::{run_picking, PickingMode, PickingPolicy, PickingReport, StopReason};
use mograsp::planner::PlannerConfig;
use mograsp::sim::SimParams;
use mograsp::Gripper;
use rayon::prelude::*;
use serde::Serialize;

use crate::objects::ObjectLibrary;
use crate::scenes::{gen_clutter_scene, GenError};

#[derive(Debug, Clone)]
pub struct PickBenchConfig {
    pub scenes: usize,
    pub seed: u64,
    /// Side of the square the objects are clustered in, in metres.
    pub table_side: f64,
    pub min_separation: f64,
    pub modes: Vec<PickingMode>,
    pub policy: PickingPolicy,
    pub gripper: Gripper,
    pub sim: SimParams,
    pub planner: PlannerConfig,
}

impl PickBenchConfig {
    pub fn scene_seed(&self, scene: usize) -> u64 {
        self.seed.wrapping_mul(0xD6E8_FEB8_6659_FD93) ^ scene as u64
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PickRow {
    pub scene: usize,
    pub mode: PickingMode,
    pub objects_total: usize,
    pub objects_picked: usize,
    pub grasp_attempts: usize,
    pub successful_attempts: usize,
    pub success_rate: f64,
    pub percent_picked: f64,
    pub actions_used: usize,
    pub simulated_time: f64,
    pub mean_group_size: f64,
    pub stop_reason: StopReason,
    /// Wall-clock seconds spent planning, summed over attempts.
    pub planning_time: f64,
}

impl PickRow {
    fn new(scene: usize, mode: PickingMode, r: &PickingReport) -> Self {
        let picked: Vec<usize> = r.attempts.iter().filter(|a| a.objects_picked > 0).map(|a| a.objects_picked).collect();
        PickRow {
            scene,
            mode,
            objects_total: r.objects_total,
            objects_picked: r.objects_picked,
            grasp_attempts: r.grasp_attempts,
            successful_attempts: r.successful_attempts,
            success_rate: r.success_rate,
            percent_picked: r.percent_picked,
            actions_used: r.actions_used,
            simulated_time: r.simulated_time,
            mean_group_size: if picked.is_empty() {
                0.0
            } else {
                picked.iter().sum::<usize>() as f64 / picked.len() as f64
            },
            stop_reason: r.stop_reason,
            planning_time: r.attempts.iter().map(|a| a.plan_time).sum(),
        }
    }

    pub fn cleared(&self) -> bool {
        self.stop_reason == StopReason::Cleared
    }
}

/// `a` clears the table with fewer actions than `b`, or `b` does not clear
/// it at all while `a` picks more objects.
pub fn beats(a: &PickRow, b: &PickRow) -> bool {
    match (a.cleared(), b.cleared()) {
        (true, true) => a.actions_used < b.actions_used,
        (true, false) => true,
        (false, true) => false,
        (false, false) => a.objects_picked > b.objects_picked,
    }
}

pub fn run_pick_bench(cfg: &PickBenchConfig, library: &ObjectLibrary) -> Result<Vec<PickRow>, GenError> {
    let per_scene: Vec<Vec<PickRow>> = (0..cfg.scenes)
        .into_par_iter()
        .map(|scene| {
            let seed = cfg.scene_seed(scene);
            let s = gen_clutter_scene(library, cfg.table_side, cfg.min_separation, seed)?;
            Ok(cfg
                .modes
                .iter()
                .map(|&mode| {
                    let policy = PickingPolicy { mode, ..cfg.policy };
                    let planner = PlannerConfig { rng_seed: seed, ..cfg.planner };
                    PickRow::new(scene, mode, &run_picking(&s, &policy, &planner, &cfg.gripper, &cfg.sim, seed))
                })
                .collect())
        })
        .collect::<Result<_, GenError>>()?;
    Ok(per_scene.into_iter().flatten().collect())
}
