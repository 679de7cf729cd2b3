//! Planning library for retrieving a target disc-shaped object from dense
//! 2D clutter with as few obstacle relocations as possible.
//!
//! The library models a tabletop scene of cylindrical objects seen from a
//! fixed camera, builds an unweighted graph over object poses whose edges
//! certify collision-free swept-disc motions, and searches it for min-hop
//! relocation plans. On top of the static planner sit a dynamic replanner
//! (newly revealed objects, arm-collision constraints) and an occlusion-driven
//! target-search planner, plus the greedy baselines they are compared against.
//!
//! All geometry is generic over the scalar type via [`Real`]; the crate root
//! exports `f64` aliases ([`Scene`], [`Plan`], [`Trace`], ...) which the CLI
//! and simulator use.

pub mod collision;
pub mod error;
pub mod geom;
pub mod occlusion;
pub mod plangraph;
pub mod planners;
pub mod scene;
pub mod sim;

use std::fmt;

/// Floating-point scalar the geometry is generic over: `f32` or `f64`.
pub trait Real:
    num_traits::Float + num_traits::FromPrimitive + num_traits::ToPrimitive + fmt::Debug + fmt::Display + Default + Send + Sync + 'static
{
    /// Converts a finite `f64` constant into this scalar type.
    fn of(v: f64) -> Self {
        num_traits::FromPrimitive::from_f64(v).expect("finite f64 literal")
    }

    /// Widens to `f64` (exact for f32/f64).
    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("real scalar fits in f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Default scalar used by the CLI and the simulator.
pub type Scalar = f64;

pub type Point2 = geom::Point<Scalar>;
pub type Scene = scene::SceneState<Scalar>;
pub type Graph = plangraph::PlanGraph<Scalar>;
pub type Plan = planners::RelocationPlan<Scalar>;
pub type Trace = planners::ExecutionTrace<Scalar>;
pub type Config = planners::PlanConfig<Scalar>;

pub use error::{PlanError, SceneError};
pub use scene::ObjectId;
