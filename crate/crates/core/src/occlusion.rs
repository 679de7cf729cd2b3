//! Camera-based visibility: per-object occluded area on the table plane,
//! boundary-sample visibility, accessibility from the robot access point, and
//! the reveal model that promotes hidden objects to known ones.

use crate::collision::{edge_free, EdgePredicate};
use crate::geom::Point;
use crate::scene::{CameraConfig, ObjectId, SceneObject, SceneState};
use crate::Real;

/// Grid and threshold parameters for the occlusion computations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OcclusionModel<R> {
    /// Table-plane sampling step (meters).
    pub grid_resolution: R,
    /// Fraction of visible boundary samples above which a hidden object is
    /// considered detected under the visibility reveal policy.
    pub visibility_threshold: R,
}

impl<R: Real> Default for OcclusionModel<R> {
    fn default() -> Self {
        OcclusionModel {
            grid_resolution: R::of(0.005),
            visibility_threshold: R::of(0.5),
        }
    }
}

/// Rule deciding when a hidden object becomes known.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RevealPolicy {
    /// A hidden object is revealed once it is accessible to the robot.
    #[default]
    Accessibility,
    /// A hidden object is revealed once enough of its boundary has a clear
    /// camera sight line.
    Visibility,
}

impl RevealPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            RevealPolicy::Accessibility => "accessibility",
            RevealPolicy::Visibility => "visibility",
        }
    }
}

/// Number of boundary samples used by [`visible_fraction`]; resolves
/// occluders down to roughly 6° of arc.
pub const BOUNDARY_SAMPLES: usize = 64;

/// True when the sight segment from `a` to `b` (3D points as planar point +
/// height) passes through the solid cylinder over `center` of the given
/// radius and height.
fn segment_hits_cylinder<R: Real>(
    a: (Point<R>, R),
    b: (Point<R>, R),
    center: Point<R>,
    radius: R,
    height: R,
) -> bool {
    let (ap, az) = a;
    let (bp, bz) = b;
    let dz = bz - az;
    // Parameter range where the segment's height lies within [0, height].
    let (mut t0, mut t1) = if dz.abs() < R::of(1e-300) {
        if az < R::zero() || az > height {
            return false;
        }
        (R::zero(), R::one())
    } else {
        let ta = (R::zero() - az) / dz;
        let tb = (height - az) / dz;
        (ta.min(tb), ta.max(tb))
    };
    t0 = t0.max(R::zero());
    t1 = t1.min(R::one());
    if t0 > t1 {
        return false;
    }
    let p0 = ap.lerp(bp, t0);
    let p1 = ap.lerp(bp, t1);
    crate::geom::dist_point_segment(center, p0, p1) <= radius
}

/// True when the table point `p` lies in the planar shadow `obj` casts from
/// the camera: outside the object's own footprint, with the sight line from
/// the camera to `(p, 0)` intersecting the object's cylinder.
pub fn point_occluded_by<R: Real>(
    p: Point<R>,
    obj: &SceneObject<R>,
    camera: &CameraConfig<R>,
) -> bool {
    if obj.disc().contains(p) {
        return false;
    }
    segment_hits_cylinder(
        (camera.ground, camera.height),
        (p, R::zero()),
        obj.center,
        obj.radius,
        obj.height,
    )
}

/// Area of the workspace shadowed by `obj` alone, measured on a grid of cell
/// centers anchored at the workspace origin. Overlaps with other objects'
/// shadows are deliberately not subtracted.
pub fn occluded_area<R: Real>(
    obj: &SceneObject<R>,
    scene: &SceneState<R>,
    model: &OcclusionModel<R>,
) -> R {
    let g = model.grid_resolution;
    let half = g * R::of(0.5);
    let nx = (scene.workspace.width / g).as_f64().ceil() as usize;
    let ny = (scene.workspace.depth / g).as_f64().ceil() as usize;
    let mut count = 0u64;
    for i in 0..nx {
        let x = g * R::of(i as f64) + half;
        if x > scene.workspace.width {
            continue;
        }
        for j in 0..ny {
            let y = g * R::of(j as f64) + half;
            if y > scene.workspace.depth {
                continue;
            }
            if point_occluded_by(Point::new(x, y), obj, &scene.camera) {
                count += 1;
            }
        }
    }
    g * g * R::of(count as f64)
}

/// Fraction of evenly spaced points on the object's boundary circle (at the
/// object's top height) with a camera sight line clear of every other
/// present object.
pub fn visible_fraction<R: Real>(
    obj: &SceneObject<R>,
    scene: &SceneState<R>,
    _model: &OcclusionModel<R>,
) -> R {
    let blockers: Vec<&SceneObject<R>> = scene
        .present()
        .filter(|o| o.id != obj.id)
        .collect();
    let mut visible = 0usize;
    for k in 0..BOUNDARY_SAMPLES {
        let angle = 2.0 * std::f64::consts::PI * k as f64 / BOUNDARY_SAMPLES as f64;
        let bp = Point::new(
            obj.center.x + obj.radius * R::of(angle.cos()),
            obj.center.y + obj.radius * R::of(angle.sin()),
        );
        let clear = blockers.iter().all(|o| {
            !segment_hits_cylinder(
                (scene.camera.ground, scene.camera.height),
                (bp, obj.height),
                o.center,
                o.radius,
                o.height,
            )
        });
        if clear {
            visible += 1;
        }
    }
    R::of(visible as f64) / R::of(BOUNDARY_SAMPLES as f64)
}

/// Ids of known objects the end-effector can reach from the access point
/// without relocating anything, under the given edge predicate. Sorted by id.
pub fn accessible_set<R: Real>(
    scene: &SceneState<R>,
    predicate: EdgePredicate,
    bin_width_deg: u32,
) -> Vec<ObjectId> {
    let r_g = scene.dilated_radius();
    let walls = scene.walls();
    let mut out: Vec<ObjectId> = scene
        .known()
        .filter(|o| {
            let others = scene.known_discs_except(&[o.id]);
            edge_free(
                scene.robot.access_point,
                o.center,
                &others,
                r_g,
                Some(&walls),
                predicate,
                bin_width_deg,
            )
        })
        .map(|o| o.id)
        .collect();
    out.sort();
    out
}

/// Applies the reveal policy until a fixpoint, returning the updated scene
/// and the ids revealed (in id order per sweep).
pub fn reveal_update<R: Real>(
    scene: &SceneState<R>,
    policy: RevealPolicy,
    model: &OcclusionModel<R>,
    predicate: EdgePredicate,
    bin_width_deg: u32,
) -> (SceneState<R>, Vec<ObjectId>) {
    let mut state = scene.clone();
    let mut revealed = Vec::new();
    loop {
        let hidden: Vec<ObjectId> = state
            .objects
            .iter()
            .filter(|o| o.visibility == crate::scene::Visibility::Hidden)
            .map(|o| o.id)
            .collect();
        if hidden.is_empty() {
            break;
        }
        let newly: Vec<ObjectId> = match policy {
            RevealPolicy::Accessibility => {
                // Accessibility of hidden objects is judged with everything
                // physically present treated as known.
                let all_present = state.with_revealed(&hidden);
                let acc = accessible_set(&all_present, predicate, bin_width_deg);
                hidden.into_iter().filter(|id| acc.contains(id)).collect()
            }
            RevealPolicy::Visibility => hidden
                .into_iter()
                .filter(|id| {
                    let obj = state.get(*id).expect("hidden id exists");
                    visible_fraction(obj, &state, model) >= model.visibility_threshold
                })
                .collect(),
        };
        if newly.is_empty() {
            break;
        }
        state = state.with_revealed(&newly);
        revealed.extend(newly);
    }
    (state, revealed)
}
