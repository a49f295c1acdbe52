//! Angle normalization and body-to-world frame rotation (NED, yaw clockwise from North).

use crate::scalar::Scalar;

use super::SimError;

/// Wraps a finite angle in degrees into `(-180, 180]`.
///
/// The result is congruent to `angle` modulo 360 and the map is idempotent.
pub fn normalize_yaw<S: Scalar>(angle: S) -> Result<S, SimError> {
    if !angle.is_finite() {
        return Err(SimError::NonFinite { what: "angle" });
    }
    Ok(wrap_degrees(angle))
}

pub(crate) fn wrap_degrees<S: Scalar>(angle: S) -> S {
    let full = S::of(360.0);
    let half = S::of(180.0);
    let r = angle % full;
    if r > half {
        r - full
    } else if r <= -half {
        r + full
    } else {
        r
    }
}

/// Signed rotation of smallest magnitude taking heading `from` to heading `to`, in `(-180, 180]`.
pub fn shortest_rotation<S: Scalar>(from: S, to: S) -> S {
    wrap_degrees(to - from)
}

/// A displacement expressed in the robot body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyDelta<S> {
    pub forward: S,
    pub right: S,
    pub down: S,
}

impl<S: Scalar> BodyDelta<S> {
    pub fn new(forward: S, right: S, down: S) -> Self {
        Self { forward, right, down }
    }
}

/// A displacement expressed in the world NED frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldDelta<S> {
    pub north: S,
    pub east: S,
    pub down: S,
}

/// Rotates a body-frame displacement into the world frame for a heading `yaw` (degrees).
///
/// `dn = f·cos(yaw) − r·sin(yaw)`, `de = f·sin(yaw) + r·cos(yaw)`, `dd = d`.
pub fn body_to_world<S: Scalar>(delta: BodyDelta<S>, yaw: S) -> Result<WorldDelta<S>, SimError> {
    if !(delta.forward.is_finite() && delta.right.is_finite() && delta.down.is_finite()) {
        return Err(SimError::NonFinite { what: "displacement" });
    }
    if !yaw.is_finite() {
        return Err(SimError::NonFinite { what: "angle" });
    }
    let (sin, cos) = yaw.to_radians().sin_cos();
    Ok(WorldDelta {
        north: delta.forward * cos - delta.right * sin,
        east: delta.forward * sin + delta.right * cos,
        down: delta.down,
    })
}
