use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::sim::Trajectory;

use super::{match_actions, MatchConfig, MetricsError};

/// Fraction of ground-truth actions that were matched.
pub fn completeness(matches: &[bool]) -> Result<f64, MetricsError> {
    if matches.is_empty() {
        return Err(MetricsError::EmptyGroundTruth);
    }
    Ok(matches.iter().filter(|m| **m).count() as f64 / matches.len() as f64)
}

/// 1 iff every action was matched (completeness exactly 1), else 0.
pub fn success(completeness: f64) -> u8 {
    u8::from(completeness == 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskScore {
    pub task_id: String,
    pub matches: Vec<bool>,
    pub completeness: f64,
    pub sr: u8,
    /// Scored predicted actions beyond the ground-truth length.
    #[serde(default)]
    pub surplus_actions: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TaskScore {
    /// Score for a prediction that produced no trajectory at all.
    pub fn failed(task_id: impl Into<String>, gt_actions: usize, error: impl Into<String>) -> Result<Self, MetricsError> {
        let matches = vec![false; gt_actions];
        let c = completeness(&matches)?;
        Ok(Self { task_id: task_id.into(), matches, completeness: c, sr: 0, surplus_actions: 0, error: Some(error.into()) })
    }
}

/// Scores a (possibly partial) predicted trajectory against ground truth.
///
/// `error` is the execution failure of the prediction, if any: actions emitted
/// before the failure still count, but SR is forced to 0.
pub fn score_task<S: Scalar>(
    task_id: impl Into<String>,
    predicted: &Trajectory<S>,
    error: Option<String>,
    ground_truth: &Trajectory<S>,
    cfg: &MatchConfig<S>,
) -> Result<TaskScore, MetricsError> {
    let matches = match_actions(predicted, ground_truth, cfg)?;
    let c = completeness(&matches)?;
    let pred_len = cfg.scored_actions(predicted).len();
    let surplus_actions = pred_len.saturating_sub(matches.len());
    let mut sr = success(c);
    if error.is_some() || (cfg.strict_length && surplus_actions > 0) {
        sr = 0;
    }
    Ok(TaskScore { task_id: task_id.into(), matches, completeness: c, sr, surplus_actions, error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{Pose, Transition};

    #[test]
    fn completeness_examples() {
        assert_eq!(completeness(&[true, true, true, false]).unwrap(), 0.75);
        assert_eq!(completeness(&[false, false]).unwrap(), 0.0);
        assert_eq!(completeness(&[true; 5]).unwrap(), 1.0);
        assert!(matches!(completeness(&[]), Err(MetricsError::EmptyGroundTruth)));
    }

    #[test]
    fn success_examples() {
        assert_eq!(success(1.0), 1);
        assert_eq!(success(0.99), 0);
        assert_eq!(success(0.0), 0);
    }

    fn traj(ts: &[Transition<f64>]) -> Trajectory<f64> {
        let mut t = Trajectory::empty("uav", Pose::origin());
        t.transitions = ts.to_vec();
        t.final_pose = t.replay();
        t
    }

    #[test]
    fn surplus_action_keeps_completeness_but_fails_sr() {
        let gt = traj(&[Transition::translate(1.0, 0.0, 0.0)]);
        let pred = traj(&[Transition::translate(1.0, 0.0, 0.0), Transition::rotate(30.0)]);
        let s = score_task("t", &pred, None, &gt, &MatchConfig::default()).unwrap();
        assert_eq!((s.completeness, s.sr, s.surplus_actions), (1.0, 0, 1));
        let lenient = MatchConfig { strict_length: false, ..MatchConfig::default() };
        assert_eq!(score_task("t", &pred, None, &gt, &lenient).unwrap().sr, 1);
    }

    #[test]
    fn execution_error_forces_zero_sr() {
        let gt = traj(&[Transition::translate(1.0, 0.0, 0.0), Transition::translate(2.0, 0.0, 0.0)]);
        let pred = traj(&[Transition::translate(1.0, 0.0, 0.0)]);
        let s = score_task("t", &pred, Some("boom".into()), &gt, &MatchConfig::default()).unwrap();
        assert_eq!(s.matches, vec![true, false]);
        assert_eq!((s.completeness, s.sr), (0.5, 0));
    }

    #[test]
    fn empty_ground_truth_is_malformed() {
        let gt = traj(&[]);
        assert!(score_task("t", &gt, None, &gt, &MatchConfig::default()).is_err());
    }
}
