//! Stage one: prompt the model for task instructions and keep the ones that
//! pass the lexical policy, re-prompting for whatever is still missing.

use std::collections::{BTreeMap, HashSet};

use roboground_llm::{ChatClient, ChatMessage, ChatRequest};
use serde::{Deserialize, Serialize};

use crate::policy::{self, Violation};
use crate::prompts::{ComplexityClass, PatternCount, PromptProfile};
use crate::SynthesisError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstructionRecord {
    pub id: String,
    pub text: String,
    pub profile_id: String,
    pub pattern: String,
    pub complexity_class: ComplexityClass,
    pub needs_human_review: bool,
    pub generator_model: String,
}

/// A generated line that was not kept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub profile_id: String,
    pub attempt: usize,
    pub line: String,
    pub rule: String,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct GenerationConfig {
    /// Re-prompts after the first request.
    pub max_retries: usize,
    pub seed: Option<u64>,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self { max_retries: 3, seed: None }
    }
}

#[derive(Debug, Clone, Default)]
pub struct InstructionOutput {
    pub records: Vec<InstructionRecord>,
    pub rejections: Vec<Rejection>,
    pub attempts: usize,
    /// Requested instructions still missing after the last retry.
    pub shortfall: Vec<PatternCount>,
}

fn rule_name(v: &Violation) -> &'static str {
    match v {
        Violation::NotATask => "not_a_task",
        Violation::Distance { .. } => "distance",
        Violation::Rotation { .. } => "rotation",
        Violation::Duplicate => "duplicate",
    }
}

/// Runs one prompt profile to completion or until retries run out.
pub fn generate_instructions(
    client: &dyn ChatClient,
    profile: &PromptProfile,
    cfg: &GenerationConfig,
) -> Result<InstructionOutput, SynthesisError> {
    generate_with_seen(client, profile, cfg, &mut HashSet::new())
}

/// Runs several profiles in order. A task accepted under one profile counts
/// as a duplicate under every later one.
pub fn generate_all(
    client: &dyn ChatClient,
    profiles: &[PromptProfile],
    cfg: &GenerationConfig,
) -> Result<Vec<InstructionOutput>, SynthesisError> {
    let mut seen = HashSet::new();
    profiles.iter().map(|p| generate_with_seen(client, p, cfg, &mut seen)).collect()
}

fn generate_with_seen(
    client: &dyn ChatClient,
    profile: &PromptProfile,
    cfg: &GenerationConfig,
    seen: &mut HashSet<String>,
) -> Result<InstructionOutput, SynthesisError> {
    profile.validate().map_err(SynthesisError::Config)?;
    let model = client.model_id();
    let system = profile.system_prompt();
    let mut remaining: BTreeMap<String, usize> = profile.counts.iter().map(|c| (c.pattern.clone(), c.count)).collect();
    let order: Vec<String> = profile.counts.iter().map(|c| c.pattern.clone()).collect();
    let mut out = InstructionOutput::default();
    let mut accepted: Vec<(String, String)> = Vec::new();

    for attempt in 1..=cfg.max_retries + 1 {
        if remaining.values().all(|&n| n == 0) {
            break;
        }
        let user = if attempt == 1 {
            "Generate the tasks.".to_string()
        } else {
            let missing: Vec<(String, usize)> = order.iter().map(|p| (p.clone(), remaining[p])).collect();
            profile.reprompt(attempt, &missing)
        };
        let mut request = ChatRequest::new(model.clone(), vec![ChatMessage::system(system.clone()), ChatMessage::user(user)]);
        request.temperature = 1.0;
        request.max_tokens = 8192;
        request.seed = cfg.seed;
        let reply = client.complete(&request)?.content;
        out.attempts = attempt;

        for line in policy::candidate_lines(&reply) {
            let reject = |rule: &str, reason: String| Rejection {
                profile_id: profile.id.clone(),
                attempt,
                line: line.clone(),
                rule: rule.into(),
                reason,
            };
            if let Err(v) = policy::check(&line) {
                out.rejections.push(reject(rule_name(&v), v.to_string()));
                continue;
            }
            if !seen.insert(policy::dedup_key(&line)) {
                out.rejections.push(reject("duplicate", Violation::Duplicate.to_string()));
                continue;
            }
            let pattern = match profile.complexity_class {
                ComplexityClass::Simple => policy::classify_simple(&line).to_string(),
                ComplexityClass::Complex => order[0].clone(),
            };
            match remaining.get_mut(&pattern) {
                Some(n) if *n > 0 => {
                    *n -= 1;
                    accepted.push((pattern, line));
                }
                _ => out.rejections.push(reject("over_quota", format!("no `{pattern}` tasks left to fill"))),
            }
        }
    }

    out.shortfall = order
        .iter()
        .filter(|p| remaining[*p] > 0)
        .map(|p| PatternCount { pattern: p.clone(), count: remaining[p] })
        .collect();
    if !out.shortfall.is_empty() {
        tracing::warn!(profile = %profile.id, shortfall = ?out.shortfall, "instruction quota not met");
    }
    out.records = accepted
        .into_iter()
        .enumerate()
        .map(|(i, (pattern, text))| InstructionRecord {
            id: format!("{}-{:03}", profile.id, i + 1),
            text,
            profile_id: profile.id.clone(),
            pattern,
            complexity_class: profile.complexity_class,
            needs_human_review: profile.complexity_class == ComplexityClass::Complex,
            generator_model: model.clone(),
        })
        .collect();
    Ok(out)
}
