use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::sim::{shortest_rotation, Trajectory, Transition, TransitionKind};

use super::MetricsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    /// Each ground-truth index is judged on its own.
    #[default]
    PerIndex,
    /// Matching stops at the first mismatch.
    Prefix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", default)]
pub struct MatchConfig<S> {
    /// Meters, per component.
    pub position_tolerance: S,
    /// Degrees, on the circle.
    pub yaw_tolerance: S,
    pub mode: MatchMode,
    pub ignore_kinds: BTreeSet<TransitionKind>,
    /// Merge consecutive rotations into one net rotation before matching.
    pub coalesce_rotations: bool,
    /// Surplus predicted actions force SR = 0.
    pub strict_length: bool,
}

impl<S: Scalar> Default for MatchConfig<S> {
    fn default() -> Self {
        Self {
            position_tolerance: S::of(0.1),
            yaw_tolerance: S::of(1.0),
            mode: MatchMode::PerIndex,
            ignore_kinds: [TransitionKind::Takeoff, TransitionKind::Land].into_iter().collect(),
            coalesce_rotations: false,
            strict_length: true,
        }
    }
}

impl<S: Scalar> MatchConfig<S> {
    pub fn with_tolerances(position: S, yaw: S) -> Self {
        Self { position_tolerance: position, yaw_tolerance: yaw, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        let ok = |t: S| t.is_finite() && t > S::zero();
        if !ok(self.position_tolerance) || !ok(self.yaw_tolerance) {
            return Err(MetricsError::InvalidConfig("tolerances must be positive and finite".into()));
        }
        Ok(())
    }

    /// Scored actions of a trajectory: ignored kinds dropped, rotations merged if configured.
    pub fn scored_actions(&self, trajectory: &Trajectory<S>) -> Vec<Transition<S>> {
        let mut out: Vec<Transition<S>> = Vec::with_capacity(trajectory.transitions.len());
        for t in trajectory.transitions.iter().filter(|t| !self.ignore_kinds.contains(&t.kind)) {
            match out.last_mut() {
                Some(prev)
                    if self.coalesce_rotations
                        && prev.kind == TransitionKind::Rotate
                        && t.kind == TransitionKind::Rotate =>
                {
                    *prev = Transition::rotate(prev.dtheta + t.dtheta);
                }
                _ => out.push(*t),
            }
        }
        out
    }

    pub fn action_matches(&self, predicted: &Transition<S>, expected: &Transition<S>) -> bool {
        predicted.kind == expected.kind
            && (predicted.dx - expected.dx).abs() <= self.position_tolerance
            && (predicted.dy - expected.dy).abs() <= self.position_tolerance
            && (predicted.dz - expected.dz).abs() <= self.position_tolerance
            && shortest_rotation(expected.dtheta, predicted.dtheta).abs() <= self.yaw_tolerance
    }

    /// Matches over already-filtered action sequences.
    pub fn match_sequences(&self, predicted: &[Transition<S>], expected: &[Transition<S>]) -> Vec<bool> {
        let mut matches = Vec::with_capacity(expected.len());
        let mut alive = true;
        for (i, gt) in expected.iter().enumerate() {
            let hit = alive && predicted.get(i).is_some_and(|p| self.action_matches(p, gt));
            if !hit && self.mode == MatchMode::Prefix {
                alive = false;
            }
            matches.push(hit);
        }
        matches
    }
}

/// One flag per scored ground-truth action telling whether the prediction
/// performed it at the same position in its own action sequence.
pub fn match_actions<S: Scalar>(
    predicted: &Trajectory<S>,
    ground_truth: &Trajectory<S>,
    cfg: &MatchConfig<S>,
) -> Result<Vec<bool>, MetricsError> {
    if predicted.profile != ground_truth.profile {
        return Err(MetricsError::ProfileMismatch {
            predicted: predicted.profile.clone(),
            ground_truth: ground_truth.profile.clone(),
        });
    }
    cfg.validate()?;
    Ok(cfg.match_sequences(&cfg.scored_actions(predicted), &cfg.scored_actions(ground_truth)))
}
