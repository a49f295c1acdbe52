//! Core of the robot code-grounding toolkit: a kinematic simulator for
//! configurable robot profiles, an interpreter for the restricted control
//! language that drives it, and execution-based trajectory metrics.
//!
//! The math is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix it to `f64`, which is what the rest of the workspace uses.

pub mod dsl;
pub mod metrics;
pub mod scalar;
pub mod sim;
pub mod span;
pub mod value;

pub use scalar::Scalar;
pub use span::SourceSpan;

pub type Pose = sim::Pose<f64>;
pub type Transition = sim::Transition<f64>;
pub type Trajectory = sim::Trajectory<f64>;
pub type Simulator = sim::Simulator<f64>;
pub type ApiCall = sim::ApiCall<f64>;
pub type Value = value::Value<f64>;
pub type Execution = dsl::Execution<f64>;
pub type MatchConfig = metrics::MatchConfig<f64>;

pub use dsl::{parse, pretty, strip_comments, DslError, Limits, Program};
pub use metrics::{completeness, success, TaskScore};
pub use sim::{ProfileRegistry, RobotProfile, TransitionKind};
