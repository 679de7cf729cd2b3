//! Deterministic random instance generation: discs rejection-sampled onto the
//! tabletop, a uniformly chosen target, and low-visibility objects marked
//! hidden. Instances whose target is retrievable without any relocation are
//! discarded and resampled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    CameraConfig, ObjectId, RobotConfig, Role, SceneObject, SceneState, Visibility, Workspace,
};
use crate::collision::EdgePredicate;
use crate::error::SceneError;
use crate::geom::Point;
use crate::occlusion::{accessible_set, visible_fraction, OcclusionModel};
use crate::scene::io::{DEFAULT_ARM_HALF_WIDTH, DEFAULT_END_EFFECTOR_RADIUS, DEFAULT_SAFETY_MARGIN};
use crate::Real;

/// Parameters for [`generate_with`]. The defaults reproduce the benchmark
/// tabletop: 0.7 m by 0.5 m, diameters uniform in [5 cm, 6 cm].
#[derive(Clone, Debug)]
pub struct GenParams<R> {
    pub n_objects: usize,
    pub hidden_fraction: f64,
    pub workspace: Workspace<R>,
    /// Mark the (occluded) target hidden as well, for target-search scenarios.
    pub hide_target: bool,
    /// Total rejection budget across placement retries and discarded
    /// instances.
    pub retry_budget: u32,
    pub diameter_range: (f64, f64),
    pub height_range: (f64, f64),
    pub predicate: EdgePredicate,
    pub bin_width_deg: u32,
    pub occlusion: OcclusionModel<R>,
}

impl<R: Real> Default for GenParams<R> {
    fn default() -> Self {
        GenParams {
            n_objects: 10,
            hidden_fraction: 0.0,
            workspace: Workspace {
                width: R::of(0.7),
                depth: R::of(0.5),
            },
            hide_target: false,
            retry_budget: 10_000,
            diameter_range: (0.05, 0.06),
            height_range: (0.06, 0.14),
            predicate: EdgePredicate::StraightCorridor,
            bin_width_deg: 5,
            occlusion: OcclusionModel::default(),
        }
    }
}

impl<R: Real> GenParams<R> {
    /// Keep-out margin from the walls: an object whose center sits closer
    /// than the dilated sweep radius to a closed wall can never gain a graph
    /// edge or become accessible, so placement avoids that dead band.
    fn wall_margin(&self) -> f64 {
        self.diameter_range.1 / 2.0 + DEFAULT_END_EFFECTOR_RADIUS + DEFAULT_SAFETY_MARGIN
    }
}

/// Generates a random instance with default geometry parameters.
pub fn generate_instance<R: Real>(
    seed: u64,
    n_objects: usize,
    hidden_fraction: f64,
    workspace: Workspace<R>,
) -> Result<SceneState<R>, SceneError> {
    generate_with(
        seed,
        &GenParams {
            n_objects,
            hidden_fraction,
            workspace,
            ..GenParams::default()
        },
    )
}

/// Generates a random instance; bit-for-bit reproducible for a fixed seed and
/// parameter set.
pub fn generate_with<R: Real>(seed: u64, params: &GenParams<R>) -> Result<SceneState<R>, SceneError> {
    if params.n_objects < 2 {
        return Err(SceneError::BadGenParams("need at least 2 objects"));
    }
    if !(0.0..1.0).contains(&params.hidden_fraction) {
        return Err(SceneError::BadGenParams("hidden fraction must be in [0,1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut budget = params.retry_budget;
    let spend = |budget: &mut u32| -> Result<(), SceneError> {
        if *budget == 0 {
            return Err(SceneError::InstanceGeneration {
                seed,
                budget: params.retry_budget,
            });
        }
        *budget -= 1;
        Ok(())
    };

    loop {
        let mut scene = place_objects(&mut rng, params, &mut budget, seed)?;

        let threshold = params.occlusion.visibility_threshold;
        let acc = accessible_set(&scene, params.predicate, params.bin_width_deg);
        let target_id = if params.hide_target {
            // A hidden target must be plausibly undetected: occluded from the
            // camera and not graspable where it stands.
            let candidates: Vec<ObjectId> = scene
                .objects
                .iter()
                .filter(|o| !acc.contains(&o.id))
                .filter(|o| visible_fraction(o, &scene, &params.occlusion) < threshold)
                .map(|o| o.id)
                .collect();
            if candidates.is_empty() {
                spend(&mut budget)?;
                continue;
            }
            candidates[rng.gen_range(0..candidates.len())]
        } else {
            scene.objects[rng.gen_range(0..params.n_objects)].id
        };
        scene
            .objects
            .iter_mut()
            .find(|o| o.id == target_id)
            .expect("target id exists")
            .role = Role::Target;

        // Discard instances needing no relocation, and instances the planner
        // cannot solve at all (target walled off from every accessible
        // object).
        let plan_cfg = crate::planners::PlanConfig {
            predicate: params.predicate,
            bin_width_deg: params.bin_width_deg,
            occlusion: params.occlusion,
            ..crate::planners::PlanConfig::default()
        };
        match crate::planners::static_plan(&scene, &plan_cfg) {
            Ok(plan) if !plan.is_empty() => {}
            _ => {
                spend(&mut budget)?;
                continue;
            }
        }

        // Hidden selection prefers objects the camera can barely see.
        let mut low_vis: Vec<ObjectId> = Vec::new();
        let mut rest: Vec<ObjectId> = Vec::new();
        for o in &scene.objects {
            if o.id == target_id {
                continue;
            }
            if visible_fraction(o, &scene, &params.occlusion) < threshold {
                low_vis.push(o.id);
            } else {
                rest.push(o.id);
            }
        }
        let want = (params.hidden_fraction * params.n_objects as f64).floor() as usize;
        let mut hidden = pick(&mut rng, &mut low_vis, want);
        if hidden.len() < want {
            hidden.extend(pick(&mut rng, &mut rest, want - hidden.len()));
        }
        for o in scene.objects.iter_mut() {
            if hidden.contains(&o.id) {
                o.visibility = Visibility::Hidden;
            }
        }

        if params.hide_target {
            scene
                .objects
                .iter_mut()
                .find(|o| o.id == target_id)
                .expect("target exists")
                .visibility = Visibility::Hidden;
        }

        scene.validate()?;
        return Ok(scene);
    }
}

/// Uniformly draws up to `want` ids out of `pool` (consuming them).
fn pick(rng: &mut ChaCha8Rng, pool: &mut Vec<ObjectId>, want: usize) -> Vec<ObjectId> {
    let mut out = Vec::new();
    while out.len() < want && !pool.is_empty() {
        let k = rng.gen_range(0..pool.len());
        out.push(pool.swap_remove(k));
    }
    out.sort();
    out
}

fn place_objects<R: Real>(
    rng: &mut ChaCha8Rng,
    params: &GenParams<R>,
    budget: &mut u32,
    seed: u64,
) -> Result<SceneState<R>, SceneError> {
    let w = params.workspace.width.as_f64();
    let d = params.workspace.depth.as_f64();
    let mut placed: Vec<(f64, f64, f64, f64)> = Vec::new(); // x, y, r, h
    for _ in 0..params.n_objects {
        loop {
            let r = rng.gen_range(params.diameter_range.0..=params.diameter_range.1) / 2.0;
            let h = rng.gen_range(params.height_range.0..=params.height_range.1);
            let margin = r.max(params.wall_margin());
            if 2.0 * margin >= w || 2.0 * margin >= d {
                return Err(SceneError::BadGenParams(
                    "workspace too small for the wall keep-out margin",
                ));
            }
            let x = rng.gen_range(margin..=w - margin);
            let y = rng.gen_range(margin..=d - margin);
            let clear = placed
                .iter()
                .all(|&(px, py, pr, _)| (x - px).hypot(y - py) >= r + pr);
            if clear {
                placed.push((x, y, r, h));
                break;
            }
            if *budget == 0 {
                return Err(SceneError::InstanceGeneration {
                    seed,
                    budget: params.retry_budget,
                });
            }
            *budget -= 1;
        }
    }
    let objects = placed
        .into_iter()
        .enumerate()
        .map(|(i, (x, y, r, h))| SceneObject {
            id: ObjectId(i as u32),
            center: Point::new(R::of(x), R::of(y)),
            radius: R::of(r),
            height: R::of(h),
            role: Role::Obstacle,
            visibility: Visibility::Known,
        })
        .collect();
    Ok(SceneState {
        workspace: params.workspace,
        robot: default_robot(&params.workspace),
        camera: default_camera(&params.workspace),
        objects,
    })
}

/// Robot base centered in front of the table, entering through the bottom
/// edge.
pub fn default_robot<R: Real>(workspace: &Workspace<R>) -> RobotConfig<R> {
    let half_w = workspace.width * R::of(0.5);
    RobotConfig {
        base: Point::new(half_w, R::of(-0.15)),
        base_height: R::zero(),
        end_effector_radius: R::of(DEFAULT_END_EFFECTOR_RADIUS),
        safety_margin: R::of(DEFAULT_SAFETY_MARGIN),
        arm_half_width: R::of(DEFAULT_ARM_HALF_WIDTH),
        access_point: Point::new(half_w, R::zero()),
    }
}

/// Fixed top-front camera looking over the robot's shoulder. Low enough that
/// taller front objects genuinely occlude shorter back ones.
pub fn default_camera<R: Real>(workspace: &Workspace<R>) -> CameraConfig<R> {
    CameraConfig {
        ground: Point::new(workspace.width * R::of(0.5), R::of(-0.45)),
        height: R::of(0.4),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{save_scene, to_json};

    #[test]
    fn reproduces_paper_instance_shape() {
        let ws = Workspace {
            width: 0.7,
            depth: 0.5,
        };
        let s = generate_instance::<f64>(7, 10, 0.2, ws).unwrap();
        assert_eq!(s.objects.len(), 10);
        assert_eq!(s.n_hidden(), 2);
        assert!(s.target().is_some());
        assert!(s.target().unwrap().is_known());
        for o in &s.objects {
            assert!(o.radius >= 0.025 && o.radius <= 0.03, "radius {}", o.radius);
        }
        s.validate().unwrap();
    }

    #[test]
    fn same_seed_same_bytes() {
        let ws = Workspace {
            width: 0.7,
            depth: 0.5,
        };
        let a = generate_instance::<f64>(42, 10, 0.2, ws).unwrap();
        let b = generate_instance::<f64>(42, 10, 0.2, ws).unwrap();
        assert_eq!(to_json(&a), to_json(&b));

        let dir = std::env::temp_dir().join("declutter-gen-test");
        std::fs::create_dir_all(&dir).unwrap();
        let pa = dir.join("a.json");
        let pb = dir.join("b.json");
        save_scene(&a, &pa).unwrap();
        save_scene(&b, &pb).unwrap();
        assert_eq!(std::fs::read(&pa).unwrap(), std::fs::read(&pb).unwrap());
    }

    #[test]
    fn unblockable_two_object_instance_errors() {
        // In a huge open workspace two discs never block each other, so every
        // candidate instance is discarded until the budget runs out.
        let ws = Workspace {
            width: 100.0,
            depth: 100.0,
        };
        let params = GenParams {
            n_objects: 2,
            hidden_fraction: 0.0,
            workspace: ws,
            retry_budget: 300,
            ..GenParams::default()
        };
        match generate_with::<f64>(5, &params) {
            Err(SceneError::InstanceGeneration { seed, .. }) => assert_eq!(seed, 5),
            other => panic!("expected generation failure, got {other:?}"),
        }
    }

    #[test]
    fn generated_scenes_satisfy_invariants() {
        let ws = Workspace {
            width: 0.7,
            depth: 0.5,
        };
        for seed in 0..40 {
            let s = generate_instance::<f64>(seed, 10, 0.2, ws).unwrap();
            s.validate().unwrap();
        }
    }

    #[test]
    fn hide_target_produces_hidden_low_visibility_target() {
        let params = GenParams {
            n_objects: 12,
            hidden_fraction: 0.2,
            hide_target: true,
            ..GenParams::default()
        };
        let s = generate_with::<f64>(3, &params).unwrap();
        let t = s.target().unwrap();
        assert_eq!(t.visibility, Visibility::Hidden);
        assert!(visible_fraction(t, &s, &params.occlusion) < 0.5);
        let acc = accessible_set(&s, params.predicate, params.bin_width_deg);
        assert!(!acc.contains(&t.id));
    }

    #[test]
    fn generated_instances_are_solvable() {
        let cfg = crate::planners::PlanConfig::<f64>::default();
        for seed in 100..120 {
            let s = generate_instance::<f64>(
                seed,
                10,
                0.0,
                Workspace {
                    width: 0.7,
                    depth: 0.5,
                },
            )
            .unwrap();
            let plan = crate::planners::static_plan(&s, &cfg).unwrap();
            assert!(!plan.is_empty(), "seed {seed} needs no relocation");
        }
    }
}
