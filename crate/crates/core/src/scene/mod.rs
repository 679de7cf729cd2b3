//! Domain types for tabletop scenes: cylindrical objects, robot and camera
//! configuration, workspace bounds, plus validation and deterministic
//! instance generation.

mod generate;
mod io;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::collision::Walls;
use crate::error::SceneError;
use crate::geom::{Disc, Point, Rect};
use crate::Real;

pub use generate::{generate_instance, generate_with, GenParams};
pub use io::{from_json, load_scene, save_scene, to_json};

/// Slack used when validating overlaps and bounds, so that scenes survive
/// text round-trips.
pub const GEOM_TOL: f64 = 1e-9;

/// Identifier of an object within one scene.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub u32);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Target,
    Obstacle,
}

/// What the robot currently knows about an object. `Hidden` objects are
/// physically present but unknown to the planner; `Removed` objects have
/// been relocated out of the workspace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Visibility {
    Known,
    Hidden,
    Removed,
}

/// A cylinder standing on the table: disc footprint plus height.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SceneObject<R> {
    pub id: ObjectId,
    pub center: Point<R>,
    pub radius: R,
    pub height: R,
    pub role: Role,
    pub visibility: Visibility,
}

impl<R: Real> SceneObject<R> {
    pub fn disc(&self) -> Disc<R> {
        Disc::new(self.center, self.radius)
    }

    pub fn is_target(&self) -> bool {
        self.role == Role::Target
    }

    pub fn is_known(&self) -> bool {
        self.visibility == Visibility::Known
    }

    /// Present on the table (known or hidden, not yet removed).
    pub fn is_present(&self) -> bool {
        self.visibility != Visibility::Removed
    }
}

/// Fixed manipulator base, end-effector size and the boundary point through
/// which the end-effector enters the workspace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RobotConfig<R> {
    pub base: Point<R>,
    /// Base height; recorded for fidelity, unused by the planners.
    pub base_height: R,
    pub end_effector_radius: R,
    pub safety_margin: R,
    pub arm_half_width: R,
    pub access_point: Point<R>,
}

/// Fixed top-front camera.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraConfig<R> {
    pub ground: Point<R>,
    pub height: R,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Workspace<R> {
    pub width: R,
    pub depth: R,
}

impl<R: Real> Workspace<R> {
    pub fn rect(&self) -> Rect<R> {
        Rect::from_size(self.width, self.depth)
    }

    pub fn area(&self) -> R {
        self.width * self.depth
    }
}

/// A full scene. Immutable after construction: the planners derive updated
/// scenes through [`SceneState::with_removed`] / [`SceneState::with_revealed`].
#[derive(Clone, Debug, PartialEq)]
pub struct SceneState<R> {
    pub workspace: Workspace<R>,
    pub robot: RobotConfig<R>,
    pub camera: CameraConfig<R>,
    pub objects: Vec<SceneObject<R>>,
}

impl<R: Real> SceneState<R> {
    pub fn get(&self, id: ObjectId) -> Option<&SceneObject<R>> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn known(&self) -> impl Iterator<Item = &SceneObject<R>> {
        self.objects.iter().filter(|o| o.is_known())
    }

    pub fn present(&self) -> impl Iterator<Item = &SceneObject<R>> {
        self.objects.iter().filter(|o| o.is_present())
    }

    pub fn target(&self) -> Option<&SceneObject<R>> {
        self.objects.iter().find(|o| o.is_target())
    }

    /// The target, provided the robot has detected it.
    pub fn known_target(&self) -> Option<&SceneObject<R>> {
        self.target().filter(|o| o.is_known())
    }

    /// Count of present obstacles (paper's N).
    pub fn n_obstacles(&self) -> usize {
        self.objects
            .iter()
            .filter(|o| o.is_present() && !o.is_target())
            .count()
    }

    /// Count of hidden objects (paper's M).
    pub fn n_hidden(&self) -> usize {
        self.objects
            .iter()
            .filter(|o| o.visibility == Visibility::Hidden)
            .count()
    }

    pub fn max_known_radius(&self) -> R {
        self.known()
            .map(|o| o.radius)
            .fold(R::zero(), |a, b| a.max(b))
    }

    /// Sweep radius for graph corridors: largest known radius dilated by the
    /// end-effector size and the safety margin.
    pub fn dilated_radius(&self) -> R {
        self.max_known_radius() + self.robot.end_effector_radius + self.robot.safety_margin
    }

    pub fn walls(&self) -> Walls<R> {
        Walls::new(self.workspace.rect(), self.robot.access_point)
    }

    /// Footprints of known objects, excluding the listed ids.
    pub fn known_discs_except(&self, exclude: &[ObjectId]) -> Vec<Disc<R>> {
        self.known()
            .filter(|o| !exclude.contains(&o.id))
            .map(|o| o.disc())
            .collect()
    }

    pub fn with_removed(&self, id: ObjectId) -> Self {
        let mut next = self.clone();
        if let Some(o) = next.objects.iter_mut().find(|o| o.id == id) {
            o.visibility = Visibility::Removed;
        }
        next
    }

    pub fn with_revealed(&self, ids: &[ObjectId]) -> Self {
        let mut next = self.clone();
        for o in next.objects.iter_mut() {
            if ids.contains(&o.id) && o.visibility == Visibility::Hidden {
                o.visibility = Visibility::Known;
            }
        }
        next
    }

    /// Checks every scene invariant; used on load and after generation.
    pub fn validate(&self) -> Result<(), SceneError> {
        let tol = R::of(GEOM_TOL);
        if !(self.workspace.width > R::zero() && self.workspace.depth > R::zero()) {
            return Err(SceneError::BadWorkspace);
        }
        let r = &self.robot;
        if !(r.end_effector_radius > R::zero()) {
            return Err(SceneError::BadRobot("end-effector radius must be > 0"));
        }
        if !(r.safety_margin >= R::zero()) {
            return Err(SceneError::BadRobot("safety margin must be >= 0"));
        }
        if !(r.arm_half_width > R::zero()) {
            return Err(SceneError::BadRobot("arm half-width must be > 0"));
        }
        self.validate_access_point()?;

        let mut target: Option<ObjectId> = None;
        for (i, o) in self.objects.iter().enumerate() {
            if !(o.radius > R::zero()) {
                return Err(SceneError::NonPositiveRadius { id: o.id });
            }
            if !(o.height > R::zero()) {
                return Err(SceneError::NonPositiveHeight { id: o.id });
            }
            if self.objects[..i].iter().any(|p| p.id == o.id) {
                return Err(SceneError::DuplicateId { id: o.id });
            }
            if o.is_target() {
                match target {
                    None => target = Some(o.id),
                    Some(first) => {
                        return Err(SceneError::MultipleTargets { first, second: o.id })
                    }
                }
            }
            if o.is_present() && !self.workspace.rect().contains_disc(&o.disc(), tol) {
                return Err(SceneError::OutOfBounds { id: o.id });
            }
        }
        if target.is_none() {
            return Err(SceneError::NoTarget);
        }

        let present: Vec<&SceneObject<R>> = self.present().collect();
        for (i, a) in present.iter().enumerate() {
            for b in &present[i + 1..] {
                if a.center.dist(b.center) < a.radius + b.radius - tol {
                    return Err(SceneError::OverlappingDiscs { a: a.id, b: b.id });
                }
            }
        }

        let max_h = self
            .objects
            .iter()
            .filter(|o| o.is_present())
            .map(|o| o.height)
            .fold(R::zero(), |a, b| a.max(b));
        if !(self.camera.height > max_h) {
            return Err(SceneError::CameraTooLow);
        }
        Ok(())
    }

    fn validate_access_point(&self) -> Result<(), SceneError> {
        let tol = R::of(GEOM_TOL);
        let rect = self.workspace.rect();
        let a = self.robot.access_point;
        let b = self.robot.base;
        // Distance from the base to each edge; the access point must lie on
        // the nearest one.
        let d_left = (b.x - rect.min.x).abs();
        let d_right = (b.x - rect.max.x).abs();
        let d_bottom = (b.y - rect.min.y).abs();
        let d_top = (b.y - rect.max.y).abs();
        let min_d = d_left.min(d_right).min(d_bottom).min(d_top);
        let on_left = (a.x - rect.min.x).abs() <= tol;
        let on_right = (a.x - rect.max.x).abs() <= tol;
        let on_bottom = (a.y - rect.min.y).abs() <= tol;
        let on_top = (a.y - rect.max.y).abs() <= tol;
        let in_x = a.x >= rect.min.x - tol && a.x <= rect.max.x + tol;
        let in_y = a.y >= rect.min.y - tol && a.y <= rect.max.y + tol;
        let ok = (on_left && in_y && d_left <= min_d + tol)
            || (on_right && in_y && d_right <= min_d + tol)
            || (on_bottom && in_x && d_bottom <= min_d + tol)
            || (on_top && in_x && d_top <= min_d + tol);
        if ok {
            Ok(())
        } else {
            Err(SceneError::BadAccessPoint)
        }
    }
}
