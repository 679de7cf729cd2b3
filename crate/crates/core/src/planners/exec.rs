//! Online execution: dynamic replanning under newly revealed objects and arm
//! collisions, occlusion-driven target search, and the replanning variant of
//! the distance baseline.

use std::collections::VecDeque;
use std::time::Instant;

use serde::Serialize;

use crate::error::PlanError;
use crate::geom::Point;
use crate::occlusion::{occluded_area, reveal_update};
use crate::scene::{ObjectId, SceneState};
use crate::Real;

use super::{
    arm_colliding_objects, baseline_distance, reachable_set, static_plan_toward, ArmProxy,
    PlanConfig, SearchStrategy,
};

/// One entry in an execution log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceEvent {
    /// An obstacle was moved out of the workspace.
    Relocate(ObjectId),
    /// A hidden object became known.
    Reveal(ObjectId),
    /// The current relocation plan was recomputed.
    Replan,
    /// The arm stadium for the next grasp intersected these objects.
    ArmConflict(Vec<ObjectId>),
    /// The goal object itself was grasped and taken out.
    Retrieve(ObjectId),
}

/// Everything that happened during one planner execution.
#[derive(Clone, Debug, PartialEq)]
pub struct ExecutionTrace<R> {
    pub events: Vec<TraceEvent>,
    /// Wall-clock seconds spent in each planning call.
    pub plan_times: Vec<f64>,
    /// Relocations performed before the target was detected (search phase).
    pub search_relocations: usize,
    pub final_scene: SceneState<R>,
}

impl<R: Real> ExecutionTrace<R> {
    pub fn relocations(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, TraceEvent::Relocate(_)))
            .count()
    }

    pub fn reveals(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, TraceEvent::Reveal(_)))
            .count()
    }

    pub fn replans(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, TraceEvent::Replan))
            .count()
    }

    /// Obstacle ids in relocation order (target retrieval excluded).
    pub fn relocated_ids(&self) -> Vec<ObjectId> {
        self.events
            .iter()
            .filter_map(|e| match e {
                TraceEvent::Relocate(id) => Some(*id),
                _ => None,
            })
            .collect()
    }

    pub fn retrieved(&self) -> Option<ObjectId> {
        self.events.iter().find_map(|e| match e {
            TraceEvent::Retrieve(id) => Some(*id),
            _ => None,
        })
    }
}

/// A planner failure carrying the partial trace up to the failure point.
#[derive(Debug)]
pub struct PlanFailure<R> {
    pub error: PlanError,
    pub partial: ExecutionTrace<R>,
}

struct Executor<'c, R: Real> {
    state: SceneState<R>,
    cfg: &'c PlanConfig<R>,
    arm: ArmProxy<R>,
    events: Vec<TraceEvent>,
    plan_times: Vec<f64>,
    /// Poses cleared so far this run; they act as waypoints for later grasps.
    removed_poses: Vec<Point<R>>,
    /// Temporary-target recursion stack, for cycle detection.
    stack: Vec<ObjectId>,
    /// Hard ceiling on removals: every present object at most once.
    removal_budget: usize,
    planned_once: bool,
}

impl<'c, R: Real> Executor<'c, R> {
    fn new(scene: SceneState<R>, cfg: &'c PlanConfig<R>, arm: ArmProxy<R>) -> Self {
        let removal_budget = scene.present().count();
        Executor {
            state: scene,
            cfg,
            arm,
            events: Vec::new(),
            plan_times: Vec::new(),
            removed_poses: Vec::new(),
            stack: Vec::new(),
            removal_budget,
            planned_once: false,
        }
    }

    fn into_trace(self, search_relocations: usize) -> ExecutionTrace<R> {
        ExecutionTrace {
            events: self.events,
            plan_times: self.plan_times,
            search_relocations,
            final_scene: self.state,
        }
    }

    fn reveal(&mut self) -> bool {
        let (next, revealed) = reveal_update(
            &self.state,
            self.cfg.reveal,
            &self.cfg.occlusion,
            self.cfg.predicate,
            self.cfg.bin_width_deg,
        );
        self.state = next;
        for id in &revealed {
            self.events.push(TraceEvent::Reveal(*id));
        }
        !revealed.is_empty()
    }

    fn is_graspable(&self, id: ObjectId) -> bool {
        reachable_set(
            &self.state,
            &self.removed_poses,
            self.cfg.predicate,
            self.cfg.bin_width_deg,
        )
        .contains(&id)
    }

    fn remove(&mut self, id: ObjectId, is_goal_retrieval: bool) -> Result<(), PlanError> {
        if self.removal_budget == 0 {
            // The termination bound says this cannot happen; treat running
            // out as an unreachable-goal report rather than looping forever.
            return Err(PlanError::Disconnected);
        }
        self.removal_budget -= 1;
        if let Some(o) = self.state.get(id) {
            self.removed_poses.push(o.center);
        }
        self.state = self.state.with_removed(id);
        self.events.push(if is_goal_retrieval {
            TraceEvent::Retrieve(id)
        } else {
            TraceEvent::Relocate(id)
        });
        Ok(())
    }

    fn plan_toward(&mut self, goal: ObjectId) -> Result<VecDeque<ObjectId>, PlanError> {
        let t0 = Instant::now();
        let plan = static_plan_toward(&self.state, goal, self.cfg);
        self.plan_times.push(t0.elapsed().as_secs_f64());
        if self.planned_once {
            self.events.push(TraceEvent::Replan);
        }
        self.planned_once = true;
        Ok(plan?.sequence.into())
    }

    /// Retrieves `goal`, recursively clearing arm conflicts by treating each
    /// colliding object as a temporary target. `final_target` marks the real
    /// target whose removal is a retrieval rather than a relocation.
    fn retrieve(&mut self, goal: ObjectId, final_target: bool) -> Result<(), PlanError> {
        if self.stack.contains(&goal) {
            return Err(PlanError::Disconnected);
        }
        self.stack.push(goal);
        let result = self.retrieve_inner(goal, final_target);
        self.stack.pop();
        result
    }

    fn retrieve_inner(&mut self, goal: ObjectId, final_target: bool) -> Result<(), PlanError> {
        let mut queue: Option<VecDeque<ObjectId>> = None;
        loop {
            if self.reveal() {
                // New objects invalidate the current plan.
                queue = None;
            }
            let fresh = queue.is_none();
            let q = match &mut queue {
                Some(q) => q,
                None => {
                    queue = Some(self.plan_toward(goal)?);
                    queue.as_mut().unwrap()
                }
            };
            let next = q.front().copied().unwrap_or(goal);

            let colliders = arm_colliding_objects(&self.state, next, &self.arm);
            if !colliders.is_empty() {
                self.events.push(TraceEvent::ArmConflict(colliders.clone()));
                for c in colliders {
                    if self.state.get(c).map(|o| o.is_known()).unwrap_or(false) {
                        self.retrieve(c, false)?;
                    }
                }
                // Arm clearing changed the scene outside the plan.
                queue = None;
                continue;
            }

            if !self.is_graspable(next) {
                if fresh {
                    // A freshly planned head starts accessible by
                    // construction; failing here means no progress is
                    // possible.
                    return Err(PlanError::Disconnected);
                }
                queue = None;
                continue;
            }

            let is_goal = next == goal;
            self.remove(next, is_goal && final_target)?;
            if is_goal {
                return Ok(());
            }
            q.pop_front();
        }
    }
}

fn fail<R: Real>(exec: Executor<'_, R>, error: PlanError, search: usize) -> PlanFailure<R> {
    PlanFailure {
        error,
        partial: exec.into_trace(search),
    }
}

/// Executes the dynamic replanner: computes a static plan, removes objects in
/// order, replans when hidden objects appear, and recursively clears objects
/// the arm would hit. Terminates after at most N+M relocations.
pub fn dynamic_plan<R: Real>(
    scene: &SceneState<R>,
    arm: &ArmProxy<R>,
    cfg: &PlanConfig<R>,
) -> Result<ExecutionTrace<R>, PlanFailure<R>> {
    let mut exec = Executor::new(scene.clone(), cfg, *arm);
    let Some(target) = scene.known_target().map(|o| o.id) else {
        return Err(fail(exec, PlanError::TargetUnknown, 0));
    };
    match exec.retrieve(target, true) {
        Ok(()) => Ok(exec.into_trace(0)),
        Err(e) => Err(fail(exec, e, 0)),
    }
}

/// Executes the target-search planner: while the target is undetected,
/// relocates the accessible object extremizing the strategy metric, then
/// delegates retrieval to the dynamic replanner.
pub fn uncertain_plan<R: Real>(
    scene: &SceneState<R>,
    strategy: SearchStrategy,
    arm: &ArmProxy<R>,
    cfg: &PlanConfig<R>,
) -> Result<ExecutionTrace<R>, PlanFailure<R>> {
    let mut exec = Executor::new(scene.clone(), cfg, *arm);
    let mut search = 0usize;
    loop {
        exec.reveal();
        if exec.state.known_target().is_some() {
            break;
        }
        if exec.state.present().count() == 0 {
            return Err(fail(exec, PlanError::TargetNeverFound, search));
        }
        let t0 = Instant::now();
        let graspable = reachable_set(
            &exec.state,
            &exec.removed_poses,
            cfg.predicate,
            cfg.bin_width_deg,
        );
        if graspable.is_empty() {
            let err = if exec.state.known().count() == 0 {
                PlanError::TargetNeverFound
            } else {
                PlanError::NoAccessibleObject
            };
            return Err(fail(exec, err, search));
        }
        let chosen = pick_by_strategy(&exec.state, &graspable, strategy, cfg);
        exec.plan_times.push(t0.elapsed().as_secs_f64());
        if let Err(e) = exec.remove(chosen, false) {
            return Err(fail(exec, e, search));
        }
        search += 1;
    }
    let target = exec.state.known_target().expect("target detected").id;
    match exec.retrieve(target, true) {
        Ok(()) => Ok(exec.into_trace(search)),
        Err(e) => Err(fail(exec, e, search)),
    }
}

fn pick_by_strategy<R: Real>(
    scene: &SceneState<R>,
    accessible: &[ObjectId],
    strategy: SearchStrategy,
    cfg: &PlanConfig<R>,
) -> ObjectId {
    let metric = |id: ObjectId| -> R {
        let obj = scene.get(id).expect("accessible id exists");
        match strategy {
            SearchStrategy::Volume => occluded_area(obj, scene, &cfg.occlusion),
            SearchStrategy::Closest | SearchStrategy::Farthest => {
                scene.robot.access_point.dist(obj.center)
            }
        }
    };
    let better = |a: R, b: R| -> bool {
        match strategy {
            SearchStrategy::Closest => a < b,
            SearchStrategy::Volume | SearchStrategy::Farthest => a > b,
        }
    };
    let mut best = accessible[0];
    let mut best_m = metric(best);
    for &id in &accessible[1..] {
        let m = metric(id);
        // Strict comparison: ties stay with the smaller id (accessible ids
        // come sorted).
        if better(m, best_m) {
            best = id;
            best_m = m;
        }
    }
    best
}

/// Replanning baseline for dynamic scenes: repeatedly removes every obstacle
/// on the straight end-effector corridor (recomputed as objects appear),
/// clearing arm conflicts greedily, then retrieves the target.
pub fn distance_replan<R: Real>(
    scene: &SceneState<R>,
    arm: &ArmProxy<R>,
    cfg: &PlanConfig<R>,
) -> Result<ExecutionTrace<R>, PlanFailure<R>> {
    let mut exec = Executor::new(scene.clone(), cfg, *arm);
    let Some(target) = scene.known_target().map(|o| o.id) else {
        return Err(fail(exec, PlanError::TargetUnknown, 0));
    };
    loop {
        exec.reveal();
        let t0 = Instant::now();
        let plan = baseline_distance(&exec.state, cfg);
        exec.plan_times.push(t0.elapsed().as_secs_f64());
        let plan = match plan {
            Ok(p) => p,
            Err(e) => return Err(fail(exec, e, 0)),
        };
        let next = plan.sequence.first().copied().unwrap_or(target);
        if let Err(e) = clear_arm_then_remove(&mut exec, next, next == target) {
            return Err(fail(exec, e, 0));
        }
        if next == target {
            return Ok(exec.into_trace(0));
        }
    }
}

/// Greedy arm handling for the baseline: colliding objects are removed
/// directly (no min-hop planning), recursively.
fn clear_arm_then_remove<R: Real>(
    exec: &mut Executor<'_, R>,
    id: ObjectId,
    is_goal: bool,
) -> Result<(), PlanError> {
    if exec.stack.contains(&id) {
        return Err(PlanError::Disconnected);
    }
    exec.stack.push(id);
    let result = (|| {
        loop {
            let colliders = arm_colliding_objects(&exec.state, id, &exec.arm);
            if colliders.is_empty() {
                break;
            }
            exec.events.push(TraceEvent::ArmConflict(colliders.clone()));
            for c in colliders {
                if exec.state.get(c).map(|o| o.is_known()).unwrap_or(false) {
                    clear_arm_then_remove(exec, c, false)?;
                }
            }
        }
        exec.remove(id, is_goal)
    })();
    exec.stack.pop();
    result
}
