//! Scene file I/O. The on-disk format is UTF-8 JSON with explicit SI units;
//! unknown keys are rejected. Removed objects are transient run state and are
//! not serialized.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    CameraConfig, ObjectId, RobotConfig, Role, SceneObject, SceneState, Visibility, Workspace,
};
use crate::error::SceneError;
use crate::geom::Point;
use crate::Real;

pub const DEFAULT_END_EFFECTOR_RADIUS: f64 = 0.035;
pub const DEFAULT_SAFETY_MARGIN: f64 = 0.005;
pub const DEFAULT_ARM_HALF_WIDTH: f64 = 0.02;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    units: String,
    workspace: WorkspaceFile,
    robot: RobotFile,
    camera: CameraFile,
    objects: Vec<ObjectFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkspaceFile {
    width: f64,
    depth: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RobotFile {
    x: f64,
    y: f64,
    #[serde(default)]
    h: f64,
    #[serde(default = "default_r_r")]
    r_r: f64,
    #[serde(default = "default_r_s")]
    r_s: f64,
    #[serde(default = "default_arm_half_width")]
    arm_half_width: f64,
    access_x: f64,
    access_y: f64,
}

fn default_r_r() -> f64 {
    DEFAULT_END_EFFECTOR_RADIUS
}

fn default_r_s() -> f64 {
    DEFAULT_SAFETY_MARGIN
}

fn default_arm_half_width() -> f64 {
    DEFAULT_ARM_HALF_WIDTH
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CameraFile {
    x: f64,
    y: f64,
    z: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectFile {
    id: u32,
    x: f64,
    y: f64,
    r: f64,
    h: f64,
    #[serde(default)]
    target: bool,
    #[serde(default)]
    hidden: bool,
}

fn encode<R: Real>(scene: &SceneState<R>) -> SceneFile {
    SceneFile {
        units: "m".to_owned(),
        workspace: WorkspaceFile {
            width: scene.workspace.width.as_f64(),
            depth: scene.workspace.depth.as_f64(),
        },
        robot: RobotFile {
            x: scene.robot.base.x.as_f64(),
            y: scene.robot.base.y.as_f64(),
            h: scene.robot.base_height.as_f64(),
            r_r: scene.robot.end_effector_radius.as_f64(),
            r_s: scene.robot.safety_margin.as_f64(),
            arm_half_width: scene.robot.arm_half_width.as_f64(),
            access_x: scene.robot.access_point.x.as_f64(),
            access_y: scene.robot.access_point.y.as_f64(),
        },
        camera: CameraFile {
            x: scene.camera.ground.x.as_f64(),
            y: scene.camera.ground.y.as_f64(),
            z: scene.camera.height.as_f64(),
        },
        objects: scene
            .objects
            .iter()
            .filter(|o| o.is_present())
            .map(|o| ObjectFile {
                id: o.id.0,
                x: o.center.x.as_f64(),
                y: o.center.y.as_f64(),
                r: o.radius.as_f64(),
                h: o.height.as_f64(),
                target: o.is_target(),
                hidden: o.visibility == Visibility::Hidden,
            })
            .collect(),
    }
}

fn decode<R: Real>(file: SceneFile) -> Result<SceneState<R>, SceneError> {
    if file.units != "m" {
        return Err(SceneError::Units(file.units));
    }
    let scene = SceneState {
        workspace: Workspace {
            width: R::of(file.workspace.width),
            depth: R::of(file.workspace.depth),
        },
        robot: RobotConfig {
            base: Point::new(R::of(file.robot.x), R::of(file.robot.y)),
            base_height: R::of(file.robot.h),
            end_effector_radius: R::of(file.robot.r_r),
            safety_margin: R::of(file.robot.r_s),
            arm_half_width: R::of(file.robot.arm_half_width),
            access_point: Point::new(R::of(file.robot.access_x), R::of(file.robot.access_y)),
        },
        camera: CameraConfig {
            ground: Point::new(R::of(file.camera.x), R::of(file.camera.y)),
            height: R::of(file.camera.z),
        },
        objects: file
            .objects
            .into_iter()
            .map(|o| SceneObject {
                id: ObjectId(o.id),
                center: Point::new(R::of(o.x), R::of(o.y)),
                radius: R::of(o.r),
                height: R::of(o.h),
                role: if o.target { Role::Target } else { Role::Obstacle },
                visibility: if o.hidden {
                    Visibility::Hidden
                } else {
                    Visibility::Known
                },
            })
            .collect(),
    };
    scene.validate()?;
    Ok(scene)
}

pub fn to_json<R: Real>(scene: &SceneState<R>) -> String {
    let mut s = serde_json::to_string_pretty(&encode(scene)).expect("scene serializes");
    s.push('\n');
    s
}

pub fn from_json<R: Real>(text: &str) -> Result<SceneState<R>, SceneError> {
    let file: SceneFile = serde_json::from_str(text)?;
    decode(file)
}

pub fn save_scene<R: Real>(scene: &SceneState<R>, path: impl AsRef<Path>) -> Result<(), SceneError> {
    fs::write(path, to_json(scene))?;
    Ok(())
}

pub fn load_scene<R: Real>(path: impl AsRef<Path>) -> Result<SceneState<R>, SceneError> {
    let text = fs::read_to_string(path)?;
    from_json(&text)
}
