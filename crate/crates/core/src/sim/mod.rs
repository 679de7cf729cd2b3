//! Scenario execution, the proxy cost model standing in for robot execution
//! time, brute-force oracles, and the benchmark harness.

pub mod oracle;

use std::time::Instant;

use serde::Serialize;

use crate::error::PlanError;
use crate::occlusion::RevealPolicy;
use crate::planners::{
    baseline_density, baseline_distance, distance_replan, dynamic_plan, static_plan,
    uncertain_plan, ArmProxy, ExecutionTrace, PlanConfig, PlanFailure, RelocationPlan,
    SearchStrategy, TraceEvent,
};
use crate::scene::{ObjectId, SceneState, Visibility, Workspace};
use crate::Real;

/// The three experiment scenarios: fully known scene, hidden obstacles with a
/// known target, and a hidden target requiring search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    S1,
    S2,
    S3,
}

impl Scenario {
    pub fn number(&self) -> u8 {
        match self {
            Scenario::S1 => 1,
            Scenario::S2 => 2,
            Scenario::S3 => 3,
        }
    }

    /// The reveal policy each scenario is reproduced with.
    pub fn default_reveal(&self) -> RevealPolicy {
        match self {
            Scenario::S1 | Scenario::S2 => RevealPolicy::Accessibility,
            Scenario::S3 => RevealPolicy::Visibility,
        }
    }
}

/// Which planner drives a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlannerChoice {
    Static,
    Distance,
    Density,
    Dynamic,
    DistanceReplan,
    Uncertain(SearchStrategy),
}

impl PlannerChoice {
    pub fn name(&self) -> &'static str {
        match self {
            PlannerChoice::Static => "static",
            PlannerChoice::Distance => "distance",
            PlannerChoice::Density => "density",
            PlannerChoice::Dynamic => "dynamic",
            PlannerChoice::DistanceReplan => "distance_replan",
            PlannerChoice::Uncertain(s) => match s {
                SearchStrategy::Volume => "volume",
                SearchStrategy::Closest => "closest",
                SearchStrategy::Farthest => "farthest",
            },
        }
    }

    pub fn default_for(scenario: Scenario) -> Self {
        match scenario {
            Scenario::S1 => PlannerChoice::Static,
            Scenario::S2 => PlannerChoice::Dynamic,
            Scenario::S3 => PlannerChoice::Uncertain(SearchStrategy::Volume),
        }
    }
}

/// Proxy for robot execution time: a fixed cost per pick-and-place plus a
/// per-meter transport cost for the straight run to the access point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostModel {
    pub pick_place_cost: f64,
    pub transport_cost: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            pick_place_cost: 45.0,
            transport_cost: 2.0,
        }
    }
}

/// What a run produced.
#[derive(Clone, Debug, Serialize)]
pub struct RunMetrics {
    pub relocations: usize,
    pub search_relocations: usize,
    pub planning_time_total: f64,
    pub planning_time_per_iteration: Vec<f64>,
    pub proxy_cost: f64,
    pub events: Vec<TraceEvent>,
}

impl RunMetrics {
    fn from_trace<R: Real>(
        scene: &SceneState<R>,
        trace: &ExecutionTrace<R>,
        cost: &CostModel,
    ) -> Self {
        let proxy_cost = trace
            .events
            .iter()
            .filter_map(|e| match e {
                TraceEvent::Relocate(id) | TraceEvent::Retrieve(id) => Some(*id),
                _ => None,
            })
            .map(|id| {
                let pose = scene.get(id).expect("event ids come from the scene").center;
                let run = pose.dist(scene.robot.access_point).as_f64();
                cost.pick_place_cost + cost.transport_cost * run
            })
            .sum();
        RunMetrics {
            relocations: trace.relocations(),
            search_relocations: trace.search_relocations,
            planning_time_total: trace.plan_times.iter().sum(),
            planning_time_per_iteration: trace.plan_times.clone(),
            proxy_cost,
            events: trace.events.clone(),
        }
    }

    /// Zeroes the wall-clock fields, for byte-reproducible output.
    pub fn without_times(mut self) -> Self {
        self.planning_time_total = 0.0;
        for t in &mut self.planning_time_per_iteration {
            *t = 0.0;
        }
        self
    }
}

/// A failed run still reports the metrics gathered up to the failure.
#[derive(Debug)]
pub struct RunFailure {
    pub error: PlanError,
    pub partial: RunMetrics,
}

/// Runs one scenario on one scene and collects metrics. The planner must
/// belong to the scenario's family; the scene must match the scenario's
/// visibility pattern.
pub fn run_scenario<R: Real>(
    scene: &SceneState<R>,
    scenario: Scenario,
    planner: PlannerChoice,
    cfg: &PlanConfig<R>,
    cost: &CostModel,
) -> Result<RunMetrics, RunFailure> {
    check_scenario(scene, scenario, planner).map_err(|error| RunFailure {
        error,
        partial: RunMetrics {
            relocations: 0,
            search_relocations: 0,
            planning_time_total: 0.0,
            planning_time_per_iteration: Vec::new(),
            proxy_cost: 0.0,
            events: Vec::new(),
        },
    })?;
    let arm = ArmProxy::from_robot(&scene.robot);
    let outcome: Result<ExecutionTrace<R>, PlanFailure<R>> = match planner {
        PlannerChoice::Static => execute_open_loop(scene, cfg, &arm, static_plan),
        PlannerChoice::Distance => execute_open_loop(scene, cfg, &arm, baseline_distance),
        PlannerChoice::Density => execute_open_loop(scene, cfg, &arm, baseline_density),
        PlannerChoice::Dynamic => dynamic_plan(scene, &arm, cfg),
        PlannerChoice::DistanceReplan => distance_replan(scene, &arm, cfg),
        PlannerChoice::Uncertain(strategy) => uncertain_plan(scene, strategy, &arm, cfg),
    };
    match outcome {
        Ok(trace) => Ok(RunMetrics::from_trace(scene, &trace, cost)),
        Err(failure) => Err(RunFailure {
            error: failure.error,
            partial: RunMetrics::from_trace(scene, &failure.partial, cost),
        }),
    }
}

fn check_scenario<R: Real>(
    scene: &SceneState<R>,
    scenario: Scenario,
    planner: PlannerChoice,
) -> Result<(), PlanError> {
    let planner_ok = matches!(
        (scenario, planner),
        (
            Scenario::S1,
            PlannerChoice::Static | PlannerChoice::Distance | PlannerChoice::Density
        ) | (
            Scenario::S2,
            PlannerChoice::Dynamic | PlannerChoice::DistanceReplan
        ) | (Scenario::S3, PlannerChoice::Uncertain(_))
    );
    if !planner_ok {
        return Err(PlanError::ScenarioMismatch {
            scenario: scenario.number(),
            reason: "planner does not belong to this scenario",
        });
    }
    match scenario {
        Scenario::S1 => {
            if scene.n_hidden() > 0 {
                return Err(PlanError::ScenarioMismatch {
                    scenario: 1,
                    reason: "scenario 1 scenes have no hidden objects",
                });
            }
            if scene.known_target().is_none() {
                return Err(PlanError::ScenarioMismatch {
                    scenario: 1,
                    reason: "scenario 1 requires a detected target",
                });
            }
        }
        Scenario::S2 => {
            if scene.known_target().is_none() {
                return Err(PlanError::ScenarioMismatch {
                    scenario: 2,
                    reason: "scenario 2 requires a detected target",
                });
            }
        }
        Scenario::S3 => {}
    }
    Ok(())
}

/// Executes a one-shot plan: removes the planned obstacles in order (clearing
/// arm conflicts greedily like the baselines do), then retrieves the target.
/// Reveal updates run after every removal; per-step accessibility violations
/// are logged, not fatal.
fn execute_open_loop<R: Real>(
    scene: &SceneState<R>,
    cfg: &PlanConfig<R>,
    arm: &ArmProxy<R>,
    plan_fn: impl Fn(&SceneState<R>, &PlanConfig<R>) -> Result<RelocationPlan<R>, PlanError>,
) -> Result<ExecutionTrace<R>, PlanFailure<R>> {
    let mut exec = OpenLoop {
        state: scene.clone(),
        cfg,
        arm: *arm,
        events: Vec::new(),
        removed_poses: Vec::new(),
        stack: Vec::new(),
    };
    let t0 = Instant::now();
    let plan = plan_fn(scene, cfg);
    let plan_time = t0.elapsed().as_secs_f64();
    let fail = |exec: OpenLoop<R>, error: PlanError| PlanFailure {
        error,
        partial: ExecutionTrace {
            events: exec.events,
            plan_times: vec![plan_time],
            search_relocations: 0,
            final_scene: exec.state,
        },
    };
    let plan = match plan {
        Ok(p) => p,
        Err(e) => return Err(fail(exec, e)),
    };
    let target = scene.known_target().expect("planner checked target").id;
    for id in &plan.sequence {
        if !crate::planners::reachable_set(
            &exec.state,
            &exec.removed_poses,
            cfg.predicate,
            cfg.bin_width_deg,
        )
        .contains(id)
        {
            log::warn!("open-loop step removes {id} while it is not reachable");
        }
        if let Err(e) = exec.remove_with_arm(*id, false) {
            return Err(fail(exec, e));
        }
        exec.reveal();
    }
    if let Err(e) = exec.remove_with_arm(target, true) {
        return Err(fail(exec, e));
    }
    Ok(ExecutionTrace {
        events: exec.events,
        plan_times: vec![plan_time],
        search_relocations: 0,
        final_scene: exec.state,
    })
}

struct OpenLoop<'c, R: Real> {
    state: SceneState<R>,
    cfg: &'c PlanConfig<R>,
    arm: ArmProxy<R>,
    events: Vec<TraceEvent>,
    removed_poses: Vec<crate::geom::Point<R>>,
    stack: Vec<ObjectId>,
}

impl<R: Real> OpenLoop<'_, R> {
    fn reveal(&mut self) {
        let (next, revealed) = crate::occlusion::reveal_update(
            &self.state,
            self.cfg.reveal,
            &self.cfg.occlusion,
            self.cfg.predicate,
            self.cfg.bin_width_deg,
        );
        self.state = next;
        for id in revealed {
            self.events.push(TraceEvent::Reveal(id));
        }
    }

    fn remove_with_arm(&mut self, id: ObjectId, is_goal: bool) -> Result<(), PlanError> {
        if self.stack.contains(&id) {
            return Err(PlanError::Disconnected);
        }
        if self.state.get(id).map(|o| !o.is_known()).unwrap_or(true) {
            return Ok(()); // already removed by arm clearing
        }
        self.stack.push(id);
        let result = (|| {
            loop {
                let colliders =
                    crate::planners::arm_colliding_objects(&self.state, id, &self.arm);
                if colliders.is_empty() {
                    break;
                }
                self.events.push(TraceEvent::ArmConflict(colliders.clone()));
                for c in colliders {
                    self.remove_with_arm(c, false)?;
                }
            }
            if let Some(o) = self.state.get(id) {
                self.removed_poses.push(o.center);
            }
            self.state = self.state.with_removed(id);
            self.events.push(if is_goal {
                TraceEvent::Retrieve(id)
            } else {
                TraceEvent::Relocate(id)
            });
            Ok(())
        })();
        self.stack.pop();
        result
    }
}

/// One aggregated benchmark row.
#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub size: usize,
    pub scenario: u8,
    pub planner: &'static str,
    pub mean_relocations: f64,
    pub std_relocations: f64,
    pub mean_plan_time_s: f64,
    pub std_plan_time_s: f64,
    pub mean_proxy_cost_s: f64,
    pub std_proxy_cost_s: f64,
}

/// Benchmark configuration; instances are derived deterministically from the
/// seed so that every planner sees the same scenes.
#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub repetitions: usize,
    pub seed: u64,
    pub scenario: Scenario,
    pub planners: Vec<PlannerChoice>,
    /// Hidden fraction used when the scenario needs hidden objects.
    pub hidden_fraction: f64,
    /// Report wall-clock planning times; disable for byte-reproducible CSV.
    pub measure_time: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: (6..=20).step_by(2).collect(),
            repetitions: 20,
            seed: 1,
            scenario: Scenario::S1,
            planners: vec![PlannerChoice::Static],
            hidden_fraction: 0.2,
            measure_time: true,
        }
    }
}

/// Deterministic per-instance seed stream.
fn instance_seed(base: u64, size: usize, rep: usize, attempt: u64) -> u64 {
    // splitmix64 over the packed coordinates
    let mut z = base
        .wrapping_add((size as u64) << 40)
        .wrapping_add((rep as u64) << 20)
        .wrapping_add(attempt)
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generates the scene for one (size, rep) cell, retrying derived seeds when
/// generation rejects.
pub fn bench_instance<R: Real>(
    bench: &BenchConfig,
    cfg: &PlanConfig<R>,
    size: usize,
    rep: usize,
) -> Result<SceneState<R>, crate::error::SceneError> {
    let hidden_fraction = match bench.scenario {
        Scenario::S1 => 0.0,
        Scenario::S2 | Scenario::S3 => bench.hidden_fraction,
    };
    let params = crate::scene::GenParams {
        n_objects: size,
        hidden_fraction,
        workspace: Workspace {
            width: R::of(0.7),
            depth: R::of(0.5),
        },
        hide_target: bench.scenario == Scenario::S3,
        predicate: cfg.predicate,
        bin_width_deg: cfg.bin_width_deg,
        occlusion: cfg.occlusion,
        ..crate::scene::GenParams::default()
    };
    let mut last = None;
    for attempt in 0..32 {
        let seed = instance_seed(bench.seed, size, rep, attempt);
        match crate::scene::generate_with(seed, &params) {
            Ok(s) => return Ok(s),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Runs the benchmark matrix and aggregates per (size, planner) statistics.
pub fn bench<R: Real>(
    bench_cfg: &BenchConfig,
    cfg: &PlanConfig<R>,
    cost: &CostModel,
) -> Result<Vec<BenchRow>, crate::error::SceneError> {
    let mut cfg = *cfg;
    cfg.reveal = bench_cfg.scenario.default_reveal();
    let mut rows = Vec::new();
    for &size in &bench_cfg.sizes {
        let scenes: Vec<SceneState<R>> = (0..bench_cfg.repetitions)
            .map(|rep| bench_instance(bench_cfg, &cfg, size, rep))
            .collect::<Result<_, _>>()?;
        for &planner in &bench_cfg.planners {
            let mut relocations = Vec::new();
            let mut times = Vec::new();
            let mut costs = Vec::new();
            for scene in &scenes {
                let mut run_cfg = cfg;
                if let PlannerChoice::Uncertain(strategy) = planner {
                    run_cfg.strategy = strategy;
                }
                match run_scenario(scene, bench_cfg.scenario, planner, &run_cfg, cost) {
                    Ok(m) => {
                        relocations.push(m.relocations as f64);
                        times.push(if bench_cfg.measure_time {
                            m.planning_time_total
                        } else {
                            0.0
                        });
                        costs.push(m.proxy_cost);
                    }
                    Err(f) => {
                        log::warn!(
                            "bench run failed (size {size}, planner {}): {}",
                            planner.name(),
                            f.error
                        );
                        relocations.push(f.partial.relocations as f64);
                        times.push(0.0);
                        costs.push(f.partial.proxy_cost);
                    }
                }
            }
            rows.push(BenchRow {
                size,
                scenario: bench_cfg.scenario.number(),
                planner: planner.name(),
                mean_relocations: mean(&relocations),
                std_relocations: std_dev(&relocations),
                mean_plan_time_s: mean(&times),
                std_plan_time_s: std_dev(&times),
                mean_proxy_cost_s: mean(&costs),
                std_proxy_cost_s: std_dev(&costs),
            });
        }
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "size,scenario,planner,mean_relocations,std_relocations,mean_plan_time_s,std_plan_time_s,mean_proxy_cost_s,std_proxy_cost_s";

/// Renders benchmark rows as CSV, header included.
pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.size,
            r.scenario,
            r.planner,
            r.mean_relocations,
            r.std_relocations,
            r.mean_plan_time_s,
            r.std_plan_time_s,
            r.mean_proxy_cost_s,
            r.std_proxy_cost_s
        ));
    }
    out
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation; 0 for fewer than two samples.
fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Counts obstacles present at scenario start (paper's N) and hidden objects
/// (paper's M) for bound checks.
pub fn nm_bound<R: Real>(scene: &SceneState<R>) -> usize {
    scene
        .objects
        .iter()
        .filter(|o| o.visibility != Visibility::Removed && !o.is_target())
        .count()
        + scene
            .objects
            .iter()
            .filter(|o| o.visibility == Visibility::Hidden && o.is_target())
            .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::generate_instance;

    fn ws() -> Workspace<f64> {
        Workspace {
            width: 0.7,
            depth: 0.5,
        }
    }

    #[test]
    fn s1_accessible_target_costs_one_extraction() {
        use crate::planners::tests::scene_of;
        let s = scene_of(&[(0, 0.35, 0.25, 0.03, true)]);
        let m = run_scenario(
            &s,
            Scenario::S1,
            PlannerChoice::Static,
            &PlanConfig::default(),
            &CostModel::default(),
        )
        .unwrap();
        assert_eq!(m.relocations, 0);
        let expected = 45.0 + 2.0 * 0.25;
        assert!((m.proxy_cost - expected).abs() < 1e-9, "{}", m.proxy_cost);
    }

    #[test]
    fn s2_on_scene_without_hidden_has_no_reveals() {
        let s = generate_instance::<f64>(3, 8, 0.0, ws()).unwrap();
        let m = run_scenario(
            &s,
            Scenario::S2,
            PlannerChoice::Dynamic,
            &PlanConfig::default(),
            &CostModel::default(),
        )
        .unwrap();
        assert!(m
            .events
            .iter()
            .all(|e| !matches!(e, TraceEvent::Reveal(_))));
    }

    #[test]
    fn s1_rejects_hidden_scenes() {
        let s = generate_instance::<f64>(3, 8, 0.2, ws()).unwrap();
        let err = run_scenario(
            &s,
            Scenario::S1,
            PlannerChoice::Static,
            &PlanConfig::default(),
            &CostModel::default(),
        )
        .unwrap_err();
        assert!(matches!(err.error, PlanError::ScenarioMismatch { .. }));
    }

    #[test]
    fn s3_with_known_target_skips_search() {
        let s = generate_instance::<f64>(5, 8, 0.0, ws()).unwrap();
        let m = run_scenario(
            &s,
            Scenario::S3,
            PlannerChoice::Uncertain(SearchStrategy::Farthest),
            &PlanConfig::default(),
            &CostModel::default(),
        )
        .unwrap();
        assert_eq!(m.search_relocations, 0);
    }

    #[test]
    fn metrics_invariants_hold_on_random_runs() {
        for seed in 0..10u64 {
            let s = generate_instance::<f64>(seed, 9, 0.2, ws()).unwrap();
            let mut cfg = PlanConfig::<f64>::default();
            cfg.reveal = Scenario::S2.default_reveal();
            let m = run_scenario(
                &s,
                Scenario::S2,
                PlannerChoice::Dynamic,
                &cfg,
                &CostModel::default(),
            )
            .unwrap();
            let relocate_events = m
                .events
                .iter()
                .filter(|e| matches!(e, TraceEvent::Relocate(_)))
                .count();
            assert_eq!(m.relocations, relocate_events);
            let sum: f64 = m.planning_time_per_iteration.iter().sum();
            assert!((sum - m.planning_time_total).abs() < 1e-6);
            assert!(m.relocations <= nm_bound(&s));
            // Relocate events never reference hidden or already-removed ids.
            let mut state = s.clone();
            for e in &m.events {
                match e {
                    TraceEvent::Relocate(id) | TraceEvent::Retrieve(id) => {
                        assert_eq!(state.get(*id).unwrap().visibility, Visibility::Known);
                        state = state.with_removed(*id);
                    }
                    TraceEvent::Reveal(id) => {
                        assert_eq!(state.get(*id).unwrap().visibility, Visibility::Hidden);
                        state = state.with_revealed(&[*id]);
                    }
                    _ => {}
                }
            }
        }
    }

    #[test]
    fn bench_sizes_map_to_rows_and_reps_one_has_zero_std() {
        let bench_cfg = BenchConfig {
            sizes: vec![6, 8],
            repetitions: 1,
            seed: 9,
            ..BenchConfig::default()
        };
        let rows = bench::<f64>(&bench_cfg, &PlanConfig::default(), &CostModel::default())
            .unwrap();
        assert_eq!(rows.len(), 2);
        for r in &rows {
            assert_eq!(r.std_relocations, 0.0);
            assert_eq!(r.std_proxy_cost_s, 0.0);
        }
    }

    #[test]
    fn bench_without_times_is_byte_deterministic() {
        let bench_cfg = BenchConfig {
            sizes: vec![6, 8],
            repetitions: 3,
            seed: 2,
            measure_time: false,
            ..BenchConfig::default()
        };
        let cfg = PlanConfig::default();
        let cost = CostModel::default();
        let a = to_csv(&bench::<f64>(&bench_cfg, &cfg, &cost).unwrap());
        let b = to_csv(&bench::<f64>(&bench_cfg, &cfg, &cost).unwrap());
        assert_eq!(a, b);
        assert!(a.starts_with(CSV_HEADER));
    }
}
