//! Kinematic state, frame transforms and API-call execution.

mod exec;
mod frame;
mod profile;
mod state;

use thiserror::Error;

use crate::span::SourceSpan;

pub use exec::{exec_api_call, ApiCall, CallOutcome, Simulator};
pub use frame::{body_to_world, normalize_yaw, shortest_rotation, BodyDelta, WorldDelta};
pub use profile::{AirborneCheck, ApiKind, ApiSpec, ProfileRegistry, RobotProfile, StartPose};
pub use state::{render_pose, Pose, Trajectory, Transition, TransitionKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("non-finite {what}")]
    NonFinite { what: &'static str },
    #[error("unsupported API `{name}` for profile `{profile}`")]
    UnsupportedApi { name: String, profile: String },
    #[error("bad arguments to `{name}`: {message}")]
    Argument { name: String, message: String },
    #[error("invalid state for `{name}`: {message}")]
    State { name: String, message: String },
    #[error("invalid robot profile: {message}")]
    Profile { message: String },
}

/// A simulator error located at the call site that triggered it.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at {span}")]
pub struct CallError {
    pub span: SourceSpan,
    pub kind: SimError,
}
