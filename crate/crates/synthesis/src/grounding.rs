//! Stage two: turn each instruction into a program by letting the model
//! write code, running it, and feeding failures and judge verdicts back for
//! a bounded number of rounds.

use std::sync::Arc;

use rayon::prelude::*;
use roboground_core::dsl::{execute_source, extract_code, Limits};
use roboground_core::{RobotProfile, Trajectory};
use roboground_llm::{ChatClient, ChatMessage, ChatRequest, Role};
use roboground_reward::judge::{self, Judge};
use serde::{Deserialize, Serialize};

use crate::instructions::InstructionRecord;
use crate::prompts::{ComplexityClass, GROUNDING};
use crate::SynthesisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundingStatus {
    AutoAccepted,
    NeedsReview,
    ReviewedAccepted,
    Rejected,
    Failed,
}

impl GroundingStatus {
    /// Whether the task belongs in the dataset.
    pub fn is_accepted(self) -> bool {
        matches!(self, GroundingStatus::AutoAccepted | GroundingStatus::ReviewedAccepted)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundingResult {
    pub instruction_id: String,
    pub instruction: String,
    pub profile_id: String,
    pub complexity_class: ComplexityClass,
    pub code: Option<String>,
    pub rounds_used: usize,
    pub status: GroundingStatus,
    pub trajectory: Option<Trajectory>,
    pub judge_verdict: Option<u8>,
    pub judge_transcript: String,
    pub error: Option<String>,
    pub transcript: Vec<ChatMessage>,
    pub instruction_model: String,
    pub model: String,
    pub judge_model: String,
}

#[derive(Debug, Clone)]
pub struct GroundingConfig {
    pub max_rounds: usize,
    pub jobs: usize,
    pub limits: Limits,
    pub seed: Option<u64>,
}

impl Default for GroundingConfig {
    fn default() -> Self {
        Self { max_rounds: 3, jobs: 4, limits: Limits::default(), seed: None }
    }
}

pub struct Grounder {
    client: Arc<dyn ChatClient>,
    judge: Judge,
    profile: Arc<RobotProfile>,
    config: GroundingConfig,
}

enum Round {
    Clean(String, Trajectory),
    Broken(String),
}

impl Grounder {
    pub fn new(client: Arc<dyn ChatClient>, judge: Judge, profile: Arc<RobotProfile>, config: GroundingConfig) -> Self {
        Self { client, judge, profile, config }
    }

    pub fn system_prompt(&self) -> String {
        judge::fill(GROUNDING, &self.profile)
    }

    fn attempt(&self, reply: &str) -> Round {
        let Some(code) = extract_code(reply) else {
            return Round::Broken("the reply contains no program".into());
        };
        let (trajectory, error) = execute_source::<f64>(&code, self.profile.clone(), self.config.limits);
        match error {
            Some(e) => Round::Broken(e.to_string()),
            None => Round::Clean(code, trajectory),
        }
    }

    /// Grounds one instruction.
    pub fn ground(&self, rec: &InstructionRecord) -> Result<GroundingResult, SynthesisError> {
        let model = self.client.model_id();
        let mut messages = vec![ChatMessage::system(self.system_prompt()), ChatMessage::user(format!("Task: {}", rec.text))];
        let mut result = GroundingResult {
            instruction_id: rec.id.clone(),
            instruction: rec.text.clone(),
            profile_id: rec.profile_id.clone(),
            complexity_class: rec.complexity_class,
            code: None,
            rounds_used: 0,
            status: GroundingStatus::Failed,
            trajectory: None,
            judge_verdict: None,
            judge_transcript: String::new(),
            error: None,
            transcript: Vec::new(),
            instruction_model: rec.generator_model.clone(),
            model: model.clone(),
            judge_model: self.judge.model_id().to_string(),
        };
        let mut last_clean: Option<(String, Trajectory)> = None;

        for round in 1..=self.config.max_rounds.max(1) {
            result.rounds_used = round;
            let mut request = ChatRequest::new(model.clone(), messages.clone());
            request.seed = self.config.seed;
            let reply = self.client.complete(&request)?.content;
            messages.push(ChatMessage::assistant(reply.clone()));
            let feedback = match self.attempt(&reply) {
                Round::Broken(error) => {
                    result.error = Some(error.clone());
                    format!("Running your code failed: {error}\nFix the problem and return the complete corrected program.")
                }
                Round::Clean(code, trajectory) => {
                    result.error = None;
                    let v = self.judge.check_grounding(&self.profile, &rec.text, &code, &trajectory.render_table())?;
                    result.judge_verdict = v.value;
                    result.judge_transcript.push_str(&format!("[round {round}]\n{}", v.transcript));
                    let notes = v.transcript.clone();
                    last_clean = Some((code, trajectory));
                    if v.value == Some(1) {
                        break;
                    }
                    format!(
                        "A reviewer found that your program does not carry out the task.\nReviewer notes:\n{notes}\nReturn the complete corrected program."
                    )
                }
            };
            if round < self.config.max_rounds {
                messages.push(ChatMessage::user(feedback));
            }
        }

        let positive = result.judge_verdict == Some(1) && result.error.is_none();
        result.status = match (rec.complexity_class, &last_clean) {
            (ComplexityClass::Simple, Some(_)) if positive => GroundingStatus::AutoAccepted,
            (ComplexityClass::Complex, Some(_)) => GroundingStatus::NeedsReview,
            _ => GroundingStatus::Failed,
        };
        if result.status == GroundingStatus::Failed && result.error.is_none() {
            result.error = Some("the judge rejected every round".into());
        }
        if result.status != GroundingStatus::Failed {
            result.error = None;
        }
        if let Some((code, trajectory)) = last_clean {
            result.code = Some(code);
            result.trajectory = Some(trajectory);
        }
        result.transcript = messages.into_iter().filter(|m| m.role != Role::System).collect();
        Ok(result)
    }
}

/// Grounds every record on a pool of `config.jobs` workers, keeping input order.
pub fn ground_all(grounder: &Grounder, records: &[InstructionRecord]) -> Result<Vec<GroundingResult>, SynthesisError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(grounder.config.jobs.max(1))
        .build()
        .map_err(|e| SynthesisError::Config(e.to_string()))?;
    pool.install(|| records.par_iter().map(|r| grounder.ground(r)).collect())
}
