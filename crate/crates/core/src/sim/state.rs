use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

use super::frame::wrap_degrees;

/// Robot configuration in the world NED frame. Yaw is in degrees, clockwise from North.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Pose<S> {
    pub north: S,
    pub east: S,
    pub down: S,
    pub yaw: S,
    pub airborne: bool,
}

impl<S: Scalar> Pose<S> {
    pub fn origin() -> Self {
        Self {
            north: S::zero(),
            east: S::zero(),
            down: S::zero(),
            yaw: S::zero(),
            airborne: false,
        }
    }

    pub fn position(&self) -> [S; 3] {
        [self.north, self.east, self.down]
    }

    pub fn is_finite(&self) -> bool {
        self.north.is_finite() && self.east.is_finite() && self.down.is_finite() && self.yaw.is_finite()
    }

    /// Pose reached after performing `t`.
    pub fn apply(&self, t: &Transition<S>) -> Self {
        let mut next = *self;
        match t.kind {
            TransitionKind::Translate => {
                next.north = self.north + t.dx;
                next.east = self.east + t.dy;
                next.down = self.down + t.dz;
            }
            TransitionKind::Rotate => next.yaw = wrap_degrees(self.yaw + t.dtheta),
            TransitionKind::Takeoff => next.airborne = true,
            TransitionKind::Land => next.airborne = false,
        }
        next
    }

    /// Componentwise comparison; yaw is compared on the circle.
    pub fn approx_eq(&self, other: &Self, position_tol: S, yaw_tol: S) -> bool {
        (self.north - other.north).abs() <= position_tol
            && (self.east - other.east).abs() <= position_tol
            && (self.down - other.down).abs() <= position_tol
            && wrap_degrees(self.yaw - other.yaw).abs() <= yaw_tol
            && self.airborne == other.airborne
    }
}

impl<S: Scalar> Default for Pose<S> {
    fn default() -> Self {
        Self::origin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionKind {
    Translate,
    Rotate,
    Takeoff,
    Land,
}

impl TransitionKind {
    pub const ALL: [TransitionKind; 4] = [Self::Translate, Self::Rotate, Self::Takeoff, Self::Land];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Translate => "translate",
            Self::Rotate => "rotate",
            Self::Takeoff => "takeoff",
            Self::Land => "land",
        }
    }
}

impl fmt::Display for TransitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-action state change `[dx, dy, dz, dθ]` along North, East, Down and yaw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Transition<S> {
    pub dx: S,
    pub dy: S,
    pub dz: S,
    pub dtheta: S,
    pub kind: TransitionKind,
}

impl<S: Scalar> Transition<S> {
    pub fn translate(dx: S, dy: S, dz: S) -> Self {
        Self { dx, dy, dz, dtheta: S::zero(), kind: TransitionKind::Translate }
    }

    /// `dtheta` is wrapped into `(-180, 180]`.
    pub fn rotate(dtheta: S) -> Self {
        let z = S::zero();
        Self { dx: z, dy: z, dz: z, dtheta: wrap_degrees(dtheta), kind: TransitionKind::Rotate }
    }

    pub fn marker(kind: TransitionKind) -> Self {
        debug_assert!(matches!(kind, TransitionKind::Takeoff | TransitionKind::Land));
        let z = S::zero();
        Self { dx: z, dy: z, dz: z, dtheta: z, kind }
    }

    pub fn components(&self) -> [S; 4] {
        [self.dx, self.dy, self.dz, self.dtheta]
    }

    /// Checks the kind/component invariants.
    pub fn is_well_formed(&self) -> bool {
        let z = S::zero();
        let half = S::of(180.0);
        let angle_ok = self.dtheta > -half && self.dtheta <= half;
        match self.kind {
            TransitionKind::Translate => self.dtheta == z,
            TransitionKind::Rotate => self.dx == z && self.dy == z && self.dz == z && angle_ok,
            TransitionKind::Takeoff | TransitionKind::Land => self.components().iter().all(|c| *c == z),
        }
    }
}

/// Ordered record of everything a program made the robot do.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Trajectory<S> {
    pub profile: String,
    pub initial: Pose<S>,
    pub transitions: Vec<Transition<S>>,
    #[serde(rename = "final")]
    pub final_pose: Pose<S>,
}

impl<S: Scalar> Trajectory<S> {
    pub fn empty(profile: impl Into<String>, initial: Pose<S>) -> Self {
        Self { profile: profile.into(), initial, transitions: Vec::new(), final_pose: initial }
    }

    /// Folds every transition over the initial pose.
    pub fn replay(&self) -> Pose<S> {
        self.transitions.iter().fold(self.initial, |pose, t| pose.apply(t))
    }

    pub fn is_consistent(&self, tol: S) -> bool {
        self.replay().approx_eq(&self.final_pose, tol, tol)
    }

    /// Renders one human-readable row per transition.
    pub fn rows(&self) -> Vec<String> {
        self.transitions
            .iter()
            .enumerate()
            .map(|(i, t)| {
                format!(
                    "{:>3}  {:<9} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
                    i + 1,
                    t.kind.as_str(),
                    t.dx.to_f64_lossy(),
                    t.dy.to_f64_lossy(),
                    t.dz.to_f64_lossy(),
                    t.dtheta.to_f64_lossy()
                )
            })
            .collect()
    }

    /// Full table: initial pose, transition rows, final pose.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("initial: {}\n", render_pose(&self.initial)));
        out.push_str("  #  kind             dx        dy        dz    dtheta\n");
        for row in self.rows() {
            out.push_str(&row);
            out.push('\n');
        }
        out.push_str(&format!("final:   {}\n", render_pose(&self.final_pose)));
        out
    }
}

pub fn render_pose<S: Scalar>(p: &Pose<S>) -> String {
    format!(
        "north={:.4} east={:.4} down={:.4} yaw={:.4} airborne={}",
        p.north.to_f64_lossy(),
        p.east.to_f64_lossy(),
        p.down.to_f64_lossy(),
        p.yaw.to_f64_lossy(),
        p.airborne
    )
}
