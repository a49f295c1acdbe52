//! Stage three: rewrite accepted instructions as realistic task descriptions
//! that keep the same actions.

use rayon::prelude::*;
use roboground_core::{MatchConfig, Trajectory};
use roboground_llm::{ChatClient, ChatMessage, ChatRequest};
use serde::{Deserialize, Serialize};

use crate::grounding::{Grounder, GroundingResult, GroundingStatus};
use crate::instructions::InstructionRecord;
use crate::policy::strip_list_marker;
use crate::prompts::AUGMENT;
use crate::SynthesisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentationStatus {
    Accepted,
    Flagged,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentationRecord {
    pub id: String,
    pub base_task_id: String,
    pub instruction: String,
    pub status: AugmentationStatus,
    pub flag_reason: Option<String>,
    pub attempts: usize,
    pub model: String,
}

#[derive(Debug, Clone)]
pub struct AugmentConfig {
    pub per_task: usize,
    /// Upper bound on rewrites across all tasks.
    pub total_cap: Option<usize>,
    /// Re-asks after a reply that is not a single plain paragraph.
    pub max_retries: usize,
    pub jobs: usize,
    pub seed: Option<u64>,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self { per_task: 2, total_cap: Some(395), max_retries: 3, jobs: 4, seed: None }
    }
}

const RETRY_REQUEST: &str =
    "Your answer must be a single paragraph of plain text, without lists, headings or commentary. Rewrite it.";

/// Strips wrappers models like to add and checks the shape of the answer.
pub fn clean_reply(reply: &str) -> Result<String, String> {
    let mut text = reply.trim();
    if text.len() >= 7 && text[..7].eq_ignore_ascii_case("answer:") {
        text = text[7..].trim();
    }
    let text = text.trim_matches(|c| c == '"' || c == '\u{201c}' || c == '\u{201d}').trim();
    if text.is_empty() {
        return Err("empty answer".into());
    }
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.len() > 1 {
        return Err("answer spans more than one paragraph".into());
    }
    if strip_list_marker(lines[0]) != lines[0].trim() {
        return Err("answer is formatted as a list".into());
    }
    Ok(text.to_string())
}

/// (task index, variant number) pairs: every task gets its first rewrite
/// before any task gets a second, in id order, until the cap is reached.
pub fn plan_budget(task_ids: &[&str], per_task: usize, cap: Option<usize>) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..task_ids.len()).collect();
    order.sort_by_key(|&i| task_ids[i]);
    let cap = cap.unwrap_or(usize::MAX);
    let mut plan = Vec::new();
    'outer: for k in 1..=per_task {
        for &i in &order {
            if plan.len() >= cap {
                break 'outer;
            }
            plan.push((i, k));
        }
    }
    plan.sort_by_key(|&(i, k)| (task_ids[i], k));
    plan
}

fn user_message(instruction: &str, k: usize) -> String {
    if k == 1 {
        format!("Query: \"{instruction}\"\n\nAnswer:")
    } else {
        format!("Query: \"{instruction}\"\n\nThis is rewrite number {k} for this task, so use a different real-world setting.\n\nAnswer:")
    }
}

fn same_actions(a: &Trajectory, b: &Trajectory) -> bool {
    let cfg = MatchConfig::default();
    let (sa, sb) = (cfg.scored_actions(a), cfg.scored_actions(b));
    sa.len() == sb.len() && cfg.match_sequences(&sa, &sb).iter().all(|&m| m)
}

fn rewrite(
    client: &dyn ChatClient,
    task: &GroundingResult,
    k: usize,
    cfg: &AugmentConfig,
    validator: Option<&Grounder>,
) -> Result<AugmentationRecord, SynthesisError> {
    let model = client.model_id();
    let mut messages = vec![ChatMessage::system(AUGMENT), ChatMessage::user(user_message(&task.instruction, k))];
    let mut record = AugmentationRecord {
        id: format!("{}-aug{k}", task.instruction_id),
        base_task_id: task.instruction_id.clone(),
        instruction: String::new(),
        status: AugmentationStatus::Flagged,
        flag_reason: None,
        attempts: 0,
        model: model.clone(),
    };
    for attempt in 1..=cfg.max_retries + 1 {
        record.attempts = attempt;
        let mut request = ChatRequest::new(model.clone(), messages.clone());
        request.temperature = 1.0;
        request.seed = cfg.seed;
        let reply = client.complete(&request)?.content;
        match clean_reply(&reply) {
            Ok(text) => {
                record.instruction = text;
                record.status = AugmentationStatus::Accepted;
                record.flag_reason = None;
                break;
            }
            Err(reason) => {
                record.instruction = reply.trim().to_string();
                record.flag_reason = Some(reason);
                messages.push(ChatMessage::assistant(reply));
                messages.push(ChatMessage::user(RETRY_REQUEST));
            }
        }
    }

    if let (AugmentationStatus::Accepted, Some(grounder), Some(base)) =
        (record.status, validator, task.trajectory.as_ref())
    {
        let probe = InstructionRecord {
            id: record.id.clone(),
            text: record.instruction.clone(),
            profile_id: task.profile_id.clone(),
            pattern: String::new(),
            complexity_class: task.complexity_class,
            needs_human_review: false,
            generator_model: model.clone(),
        };
        let regrounded = grounder.ground(&probe)?;
        let reason = match (&regrounded.trajectory, regrounded.status) {
            (_, GroundingStatus::Failed) => Some(format!(
                "validation_mismatch: rewrite could not be grounded ({})",
                regrounded.error.unwrap_or_default()
            )),
            (Some(t), _) if same_actions(t, base) => None,
            _ => Some("validation_mismatch: rewrite grounds to different actions than the original".into()),
        };
        if let Some(reason) = reason {
            record.status = AugmentationStatus::Flagged;
            record.flag_reason = Some(reason);
        }
    }
    Ok(record)
}

/// Rewrites accepted tasks. With `validator`, each rewrite is grounded again
/// and flagged unless it reproduces the original actions.
pub fn augment(
    client: &dyn ChatClient,
    tasks: &[GroundingResult],
    cfg: &AugmentConfig,
    validator: Option<&Grounder>,
) -> Result<Vec<AugmentationRecord>, SynthesisError> {
    let accepted: Vec<&GroundingResult> = tasks.iter().filter(|t| t.status.is_accepted()).collect();
    let ids: Vec<&str> = accepted.iter().map(|t| t.instruction_id.as_str()).collect();
    let plan = plan_budget(&ids, cfg.per_task, cfg.total_cap);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| SynthesisError::Config(e.to_string()))?;
    pool.install(|| plan.par_iter().map(|&(i, k)| rewrite(client, accepted[i], k, cfg, validator)).collect())
}
