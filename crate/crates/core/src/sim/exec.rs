//! Execution of API calls against a pose, and the stateful simulator wrapper.

use std::sync::Arc;

use crate::scalar::Scalar;
use crate::span::SourceSpan;
use crate::value::Value;

use super::frame::{body_to_world, normalize_yaw, shortest_rotation, BodyDelta};
use super::profile::{AirborneCheck, ApiKind, RobotProfile};
use super::{CallError, Pose, SimError, Trajectory, Transition, TransitionKind};

/// A named API call with already-evaluated arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiCall<S> {
    pub name: String,
    pub args: Vec<Value<S>>,
    pub span: SourceSpan,
}

impl<S: Scalar> ApiCall<S> {
    pub fn new(name: impl Into<String>, args: Vec<Value<S>>) -> Self {
        Self { name: name.into(), args, span: SourceSpan::default() }
    }

    pub fn at(mut self, span: SourceSpan) -> Self {
        self.span = span;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CallOutcome<S> {
    pub pose: Pose<S>,
    pub transition: Option<Transition<S>>,
    pub value: Option<Value<S>>,
    pub warning: Option<String>,
}

/// Executes one call from `state`. Pure: the caller owns the state.
pub fn exec_api_call<S: Scalar>(
    state: &Pose<S>,
    call: &ApiCall<S>,
    profile: &RobotProfile,
) -> Result<CallOutcome<S>, CallError> {
    let fail = |kind: SimError| CallError { span: call.span, kind };
    let name = call.name.as_str();
    let api = profile.lookup(name).ok_or_else(|| {
        fail(SimError::UnsupportedApi { name: name.into(), profile: profile.name.clone() })
    })?;
    if call.args.len() != api.arity() {
        return Err(fail(SimError::Argument {
            name: name.into(),
            message: format!("expected {} argument(s), got {}", api.arity(), call.args.len()),
        }));
    }
    let number_arg = |what: &str| -> Result<S, CallError> {
        match &call.args[0] {
            Value::Number(n) if n.is_finite() => Ok(*n),
            Value::Number(_) => Err(fail(SimError::Argument {
                name: name.into(),
                message: format!("{what} must be finite"),
            })),
            other => Err(fail(SimError::Argument {
                name: name.into(),
                message: format!("{what} must be a number, got a {}", other.type_name()),
            })),
        }
    };

    let mut warning = None;
    let moved = |t: Transition<S>| (state.apply(&t), Some(t));
    let (pose, transition, value) = match api {
        ApiKind::Takeoff => {
            let (p, t) = moved(Transition::marker(TransitionKind::Takeoff));
            (p, t, None)
        }
        ApiKind::Land => {
            let (p, t) = moved(Transition::marker(TransitionKind::Land));
            (p, t, None)
        }
        ApiKind::FlyTo => {
            let target = position_arg(&call.args[0], profile.dimensionality as usize)
                .map_err(|message| fail(SimError::Argument { name: name.into(), message }))?;
            if profile.takeoff_supported && !state.airborne {
                let message = "cannot fly while landed; call takeoff first".to_string();
                match profile.airborne_check {
                    AirborneCheck::Error => {
                        return Err(fail(SimError::State { name: name.into(), message }))
                    }
                    AirborneCheck::Warn => warning = Some(format!("{name}: {message}")),
                }
            }
            let dz = if target.len() == 3 { target[2] - state.down } else { S::zero() };
            let (p, t) = moved(Transition::translate(target[0] - state.north, target[1] - state.east, dz));
            (p, t, None)
        }
        ApiKind::SetYaw => {
            let heading = normalize_yaw(number_arg("yaw")?).map_err(fail)?;
            let (p, t) = moved(Transition::rotate(shortest_rotation(state.yaw, heading)));
            (p, t, None)
        }
        ApiKind::Rotate => {
            let delta = number_arg("angle")?;
            let (p, t) = moved(Transition::rotate(delta));
            (p, t, None)
        }
        ApiKind::MoveForward => {
            let distance = number_arg("distance")?;
            let w = body_to_world(BodyDelta::new(distance, S::zero(), S::zero()), state.yaw).map_err(fail)?;
            let (p, t) = moved(Transition::translate(w.north, w.east, S::zero()));
            (p, t, None)
        }
        ApiKind::GetYaw | ApiKind::GetHeading => (*state, None, Some(Value::Number(state.yaw))),
        ApiKind::GetPosition => {
            let coords = if profile.dimensionality == 3 {
                vec![state.north, state.east, state.down]
            } else {
                vec![state.north, state.east]
            };
            (*state, None, Some(Value::numbers(coords)))
        }
    };
    if !pose.is_finite() {
        return Err(fail(SimError::NonFinite { what: "pose" }));
    }
    Ok(CallOutcome { pose, transition, value, warning })
}

fn position_arg<S: Scalar>(arg: &Value<S>, dims: usize) -> Result<Vec<S>, String> {
    let items = arg
        .as_list()
        .ok_or_else(|| format!("position must be a list, got a {}", arg.type_name()))?;
    if items.len() != dims {
        return Err(format!("position must have {dims} elements, got {}", items.len()));
    }
    items
        .iter()
        .map(|v| match v {
            Value::Number(n) if n.is_finite() => Ok(*n),
            Value::Number(_) => Err("position coordinates must be finite".to_string()),
            Value::List(_) => Err("position coordinates must be numbers".to_string()),
        })
        .collect()
}

/// Single-owner simulator instance recording every transition it performs.
#[derive(Debug, Clone)]
pub struct Simulator<S> {
    profile: Arc<RobotProfile>,
    initial: Pose<S>,
    pose: Pose<S>,
    transitions: Vec<Transition<S>>,
    warnings: Vec<String>,
}

impl<S: Scalar> Simulator<S> {
    pub fn new(profile: Arc<RobotProfile>) -> Self {
        let initial = profile.start_pose();
        Self { profile, initial, pose: initial, transitions: Vec::new(), warnings: Vec::new() }
    }

    pub fn reset(&mut self) {
        self.pose = self.initial;
        self.transitions.clear();
        self.warnings.clear();
    }

    pub fn profile(&self) -> &RobotProfile {
        &self.profile
    }

    pub fn pose(&self) -> Pose<S> {
        self.pose
    }

    pub fn transitions(&self) -> &[Transition<S>] {
        &self.transitions
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn call(&mut self, call: &ApiCall<S>) -> Result<Option<Value<S>>, CallError> {
        let outcome = exec_api_call(&self.pose, call, &self.profile)?;
        self.pose = outcome.pose;
        self.transitions.extend(outcome.transition);
        self.warnings.extend(outcome.warning);
        Ok(outcome.value)
    }

    pub fn trajectory(&self) -> Trajectory<S> {
        Trajectory {
            profile: self.profile.name.clone(),
            initial: self.initial,
            transitions: self.transitions.clone(),
            final_pose: self.pose,
        }
    }
}
