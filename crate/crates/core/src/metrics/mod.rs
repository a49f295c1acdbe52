//! Action matching, Completeness / Success Rate, and suite aggregation.

mod matching;
mod report;
mod score;

use thiserror::Error;

pub use matching::{match_actions, MatchConfig, MatchMode};
pub use report::{aggregate, GroupSummary, Grouping, SuiteReport, TaskRow, UNGROUPED};
pub use score::{completeness, score_task, success, TaskScore};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("trajectories come from different robot profiles (`{predicted}` vs `{ground_truth}`)")]
    ProfileMismatch { predicted: String, ground_truth: String },
    #[error("ground truth has no scored actions; the task is malformed")]
    EmptyGroundTruth,
    #[error("invalid match configuration: {0}")]
    InvalidConfig(String),
}
