//! Human review queue for programs the pipeline cannot accept on its own.
//!
//! Export writes one JSON object per pending task with an empty
//! `resolution_code`. The reviewer fills in (or copies) the code; import
//! checks the file as a whole, then runs every resolution in the simulator.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use roboground_core::dsl::{execute_source, Limits};
use roboground_core::RobotProfile;
use serde::{Deserialize, Serialize};

use crate::grounding::{GroundingResult, GroundingStatus};
use crate::SynthesisError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReviewItem {
    pub task_id: String,
    pub instruction: String,
    pub candidate_code: String,
    pub trajectory_rows: Vec<String>,
    pub resolution_code: Option<String>,
}

pub fn export_review(results: &[GroundingResult]) -> Vec<ReviewItem> {
    results
        .iter()
        .filter(|r| r.status == GroundingStatus::NeedsReview)
        .map(|r| ReviewItem {
            task_id: r.instruction_id.clone(),
            instruction: r.instruction.clone(),
            candidate_code: r.code.clone().unwrap_or_default(),
            trajectory_rows: r.trajectory.as_ref().map(|t| t.rows()).unwrap_or_default(),
            resolution_code: None,
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewOutcome {
    pub accepted: usize,
    pub rejected: usize,
    /// Tasks still awaiting review because the file did not mention them.
    pub pending: Vec<String>,
}

/// Parses a filled review file. Any malformed line, unknown id or duplicate
/// aborts the import with the full list of problems.
pub fn parse_review(text: &str, results: &[GroundingResult]) -> Result<Vec<ReviewItem>, SynthesisError> {
    let pending: HashSet<&str> = results
        .iter()
        .filter(|r| r.status == GroundingStatus::NeedsReview)
        .map(|r| r.instruction_id.as_str())
        .collect();
    let mut items = Vec::new();
    let mut problems = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let n = i + 1;
        match serde_json::from_str::<ReviewItem>(line) {
            Err(e) => problems.push(format!("line {n}: {e}")),
            Ok(item) => {
                if !pending.contains(item.task_id.as_str()) {
                    problems.push(format!("line {n}: `{}` is not awaiting review", item.task_id));
                } else if !seen.insert(item.task_id.clone()) {
                    problems.push(format!("line {n}: duplicate entry for `{}`", item.task_id));
                } else {
                    items.push(item);
                }
            }
        }
    }
    if problems.is_empty() {
        Ok(items)
    } else {
        Err(SynthesisError::Review(problems))
    }
}

/// Applies parsed resolutions. A resolution that runs cleanly accepts the
/// task with that code; a missing or failing one rejects it.
pub fn apply_review(
    results: &mut [GroundingResult],
    items: &[ReviewItem],
    profile: Arc<RobotProfile>,
    limits: Limits,
) -> ReviewOutcome {
    let by_id: BTreeMap<&str, &ReviewItem> = items.iter().map(|i| (i.task_id.as_str(), i)).collect();
    let mut outcome = ReviewOutcome::default();
    for r in results.iter_mut().filter(|r| r.status == GroundingStatus::NeedsReview) {
        let Some(item) = by_id.get(r.instruction_id.as_str()) else {
            outcome.pending.push(r.instruction_id.clone());
            continue;
        };
        let Some(code) = item.resolution_code.as_deref().filter(|c| !c.trim().is_empty()) else {
            r.status = GroundingStatus::Rejected;
            r.error = Some("no resolution provided".into());
            outcome.rejected += 1;
            continue;
        };
        let (trajectory, error) = execute_source::<f64>(code, profile.clone(), limits);
        match error {
            Some(e) => {
                r.status = GroundingStatus::Rejected;
                r.error = Some(format!("resolution failed: {e}"));
                outcome.rejected += 1;
            }
            None => {
                r.status = GroundingStatus::ReviewedAccepted;
                r.code = Some(code.to_string());
                r.trajectory = Some(trajectory);
                r.error = None;
                outcome.accepted += 1;
            }
        }
    }
    outcome
}

pub fn import_review(
    text: &str,
    results: &mut [GroundingResult],
    profile: Arc<RobotProfile>,
    limits: Limits,
) -> Result<ReviewOutcome, SynthesisError> {
    let items = parse_review(text, results)?;
    Ok(apply_review(results, &items, profile, limits))
}
