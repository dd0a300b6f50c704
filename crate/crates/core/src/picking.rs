//! Clearing a table by repeated plan-and-execute rounds.
//!
//! Each round observes the scene, proposes object groups (every object plus
//! its neighbours within half the gripper's opening), plans for the largest
//! groups first and executes the first grasp found. Execution is the
//! squeeze simulation itself: grasped objects leave the scene, and a failed
//! squeeze leaves the objects wherever the jaws pushed them.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grasping::Gripper;
use crate::planner::{self, PlannerConfig};
use crate::scene::{ObjectGroup, Scene};
use crate::sim::{self, SimParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PickingMode {
    MultiObject,
    SingleObject,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PickingPolicy {
    pub mode: PickingMode,
    /// Budget on the simulated clock, in seconds.
    pub time_limit: f64,
    pub attempt_limit: usize,
    /// Simulated duration of one grasp action (approach, close, transport).
    pub seconds_per_action: f64,
}

impl Default for PickingPolicy {
    fn default() -> Self {
        PickingPolicy { mode: PickingMode::MultiObject, time_limit: 300.0, attempt_limit: 100, seconds_per_action: 5.0 }
    }
}

impl PickingPolicy {
    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.time_limit > 0.0 && self.seconds_per_action > 0.0 && self.attempt_limit > 0) {
            return Err("picking limits must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttemptOutcome {
    Success,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub group: ObjectGroup,
    pub group_size: usize,
    /// Wall-clock seconds spent planning this attempt (all groups tried).
    pub plan_time: f64,
    /// Simulated grasps tried while planning.
    pub tested_in_sim: usize,
    pub outcome: AttemptOutcome,
    pub objects_picked: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Cleared,
    TimeLimit,
    AttemptLimit,
    NoPlannableGroup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PickingReport {
    pub grasp_attempts: usize,
    pub successful_attempts: usize,
    pub objects_picked: usize,
    pub objects_total: usize,
    pub attempts: Vec<AttemptRecord>,
    /// Percentage of attempts that moved at least one object off the table.
    pub success_rate: f64,
    pub percent_picked: f64,
    pub actions_used: usize,
    pub simulated_time: f64,
    pub stop_reason: StopReason,
}

/// One group per object: every object whose centroid lies within `w_max / 2`
/// of that object's centroid. Duplicates and multi-object groups contained
/// in another group are dropped; all singletons are appended in id order.
pub fn create_obj_groups(state: &Scene, gripper: &Gripper) -> Vec<ObjectGroup> {
    let r = 0.5 * gripper.w_max;
    let centroids: Vec<(usize, crate::Point2)> = state.objects().iter().map(|o| (o.id, o.world_centroid())).collect();
    let mut multi: BTreeSet<ObjectGroup> = BTreeSet::new();
    for &(_, c) in &centroids {
        let ids = centroids.iter().filter(|(_, d)| c.distance(*d) <= r).map(|(id, _)| *id);
        if let Ok(g) = ObjectGroup::new(ids) {
            if g.len() > 1 {
                multi.insert(g);
            }
        }
    }
    let mut out: Vec<ObjectGroup> =
        multi.iter().filter(|g| !multi.iter().any(|h| g.is_strict_subset_of(h))).cloned().collect();
    let mut ids: Vec<usize> = state.ids().collect();
    ids.sort_unstable();
    out.extend(ids.into_iter().map(ObjectGroup::single));
    out
}

/// Largest groups first; equal sizes in lexicographic member order.
pub fn rank_obj_groups(mut groups: Vec<ObjectGroup>) -> Vec<ObjectGroup> {
    groups.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.members().cmp(b.members())));
    groups
}

fn report(objects_total: usize, attempts: Vec<AttemptRecord>, clock: f64, stop_reason: StopReason) -> PickingReport {
    let grasp_attempts = attempts.len();
    let successful_attempts = attempts.iter().filter(|a| a.outcome == AttemptOutcome::Success).count();
    let objects_picked = attempts.iter().map(|a| a.objects_picked).sum();
    let pct = |n: usize, d: usize| if d == 0 { 0.0 } else { 100.0 * n as f64 / d as f64 };
    PickingReport {
        grasp_attempts,
        successful_attempts,
        objects_picked,
        objects_total,
        success_rate: pct(successful_attempts, grasp_attempts),
        percent_picked: pct(objects_picked, objects_total),
        actions_used: grasp_attempts,
        attempts,
        simulated_time: clock,
        stop_reason,
    }
}

/// Runs the picking loop on `scene` until it is cleared or a limit is hit.
pub fn run_picking(
    scene: &Scene,
    policy: &PickingPolicy,
    planner_config: &PlannerConfig,
    gripper: &Gripper,
    sim_params: &SimParams,
    rng_seed: u64,
) -> PickingReport {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut state = scene.clone();
    let mut attempts: Vec<AttemptRecord> = Vec::new();
    let mut clock = 0.0;
    // Livelock guard: groups skipped after repeated failures on one state.
    let mut skipped: BTreeSet<ObjectGroup> = BTreeSet::new();
    let mut failures_on_state = 0usize;

    let stop = loop {
        if state.is_empty() {
            break StopReason::Cleared;
        }
        if attempts.len() >= policy.attempt_limit {
            break StopReason::AttemptLimit;
        }
        if clock + policy.seconds_per_action > policy.time_limit + 1e-9 {
            break StopReason::TimeLimit;
        }
        let groups: Vec<ObjectGroup> = match policy.mode {
            PickingMode::MultiObject => rank_obj_groups(create_obj_groups(&state, gripper)),
            PickingMode::SingleObject => {
                let mut ids: Vec<usize> = state.ids().collect();
                ids.sort_unstable();
                ids.shuffle(&mut rng);
                ids.into_iter().map(ObjectGroup::single).collect()
            }
        };

        let start = Instant::now();
        let mut tested = 0;
        let mut found = None;
        for g in groups.iter().filter(|g| !skipped.contains(*g)) {
            let plan = planner::plan_grasp(&state, g, gripper, planner_config, sim_params);
            tested += plan.tested_in_sim;
            if let Some(grasp) = plan.grasp {
                found = Some((g.clone(), grasp));
                break;
            }
        }
        let plan_time = start.elapsed().as_secs_f64();
        let Some((group, grasp)) = found else { break StopReason::NoPlannableGroup };

        // Execute: the squeeze is replayed on the current state.
        clock += policy.seconds_per_action;
        let executed = sim::simulate_squeeze(&state, &group, &grasp, gripper, sim_params);
        let transported: Option<(Scene, Vec<usize>)> = match &executed {
            Ok(out) => {
                // A single-object pick transports only its target; anything
                // squeezed along with it drops back where it ended up.
                let ids: Vec<usize> = match policy.mode {
                    PickingMode::MultiObject => out.grasped.iter().copied().collect(),
                    PickingMode::SingleObject => out.grasped.iter().copied().filter(|id| group.contains(*id)).collect(),
                };
                (!ids.is_empty()).then(|| (out.final_state.clone(), ids))
            }
            Err(_) => None,
        };
        let (outcome, picked) = match (transported, executed) {
            (Some((after, ids)), _) => {
                state = after;
                state.remove(&ids);
                skipped.clear();
                failures_on_state = 0;
                (AttemptOutcome::Success, ids.len())
            }
            (None, Ok(out)) => {
                let unchanged = out.final_state == state;
                state = out.final_state;
                failures_on_state = if unchanged { failures_on_state + 1 } else { 1 };
                if failures_on_state >= 3 {
                    skipped.insert(group.clone());
                }
                (AttemptOutcome::Failure, 0)
            }
            (None, Err(_)) => {
                failures_on_state += 1;
                if failures_on_state >= 3 {
                    skipped.insert(group.clone());
                }
                (AttemptOutcome::Failure, 0)
            }
        };
        attempts.push(AttemptRecord {
            group_size: group.len(),
            group,
            plan_time,
            tested_in_sim: tested,
            outcome,
            objects_picked: picked,
        });
    };
    report(scene.len(), attempts, clock, stop)
}
