//! Error types for scene validation/generation and for the planners.

use thiserror::Error;

use crate::scene::ObjectId;

/// Scene file validation and instance generation failures.
#[derive(Debug, Error)]
pub enum SceneError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("scene schema violation: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("unsupported units {0:?}, expected \"m\"")]
    Units(String),
    #[error("workspace extents must be positive")]
    BadWorkspace,
    #[error("object {id} has a non-positive radius")]
    NonPositiveRadius { id: ObjectId },
    #[error("object {id} has a non-positive height")]
    NonPositiveHeight { id: ObjectId },
    #[error("duplicate object id {id}")]
    DuplicateId { id: ObjectId },
    #[error("scene has no target object")]
    NoTarget,
    #[error("multiple targets: objects {first} and {second}")]
    MultipleTargets { first: ObjectId, second: ObjectId },
    #[error("objects {a} and {b} overlap by more than the tolerance")]
    OverlappingDiscs { a: ObjectId, b: ObjectId },
    #[error("object {id} extends outside the workspace")]
    OutOfBounds { id: ObjectId },
    #[error("robot geometry invalid: {0}")]
    BadRobot(&'static str),
    #[error("access point does not lie on the workspace edge nearest the robot base")]
    BadAccessPoint,
    #[error("camera height must exceed the tallest object")]
    CameraTooLow,
    #[error("instance generation for seed {seed} exhausted the retry budget ({budget} rejections)")]
    InstanceGeneration { seed: u64, budget: u32 },
    #[error("invalid generation parameters: {0}")]
    BadGenParams(&'static str),
}

/// Planner-level failures (Alg. failure modes and harness guards).
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("target is not a known object")]
    TargetUnknown,
    #[error("no known object is accessible")]
    NoAccessibleObject,
    #[error("plan graph does not connect any accessible object to the goal")]
    Disconnected,
    #[error("all obstacles removed without detecting a target")]
    TargetNeverFound,
    #[error("instance exceeds the brute-force size guard ({count} > {max} obstacles)")]
    SizeGuardExceeded { count: usize, max: usize },
    #[error("scene does not match scenario {scenario}: {reason}")]
    ScenarioMismatch { scenario: u8, reason: &'static str },
}
