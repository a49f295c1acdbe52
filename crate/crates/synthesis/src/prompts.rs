//! Prompt templates and the instruction-generation profiles built on them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const INSTRUCTIONS_SIMPLE: &str = include_str!("../prompts/instructions_simple.txt");
pub const INSTRUCTIONS_COMPLEX: &str = include_str!("../prompts/instructions_complex.txt");
pub const AUGMENT: &str = include_str!("../prompts/augment.txt");
pub const GROUNDING: &str = include_str!("../prompts/grounding.txt");

/// Template text by id.
pub fn template(id: &str) -> Option<&'static str> {
    match id {
        "instructions_simple" => Some(INSTRUCTIONS_SIMPLE),
        "instructions_complex" => Some(INSTRUCTIONS_COMPLEX),
        "augment" => Some(AUGMENT),
        "grounding" => Some(GROUNDING),
        "reward_judge" => Some(roboground_reward::judge::REWARD_JUDGE_TEMPLATE),
        "grounding_judge" => Some(roboground_reward::judge::GROUNDING_JUDGE_TEMPLATE),
        _ => None,
    }
}

pub const TEMPLATE_IDS: [&str; 6] =
    ["instructions_simple", "instructions_complex", "augment", "grounding", "reward_judge", "grounding_judge"];

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of every shipped template, for run manifests.
pub fn template_hashes() -> BTreeMap<String, String> {
    TEMPLATE_IDS.iter().map(|id| (id.to_string(), sha256_hex(template(id).expect("known id")))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplexityClass {
    Simple,
    Complex,
}

impl ComplexityClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ComplexityClass::Simple => "simple",
            ComplexityClass::Complex => "complex",
        }
    }
}

/// Requested number of instructions of one pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternCount {
    pub pattern: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptProfile {
    pub id: String,
    pub template: String,
    pub counts: Vec<PatternCount>,
    pub complexity_class: ComplexityClass,
}

/// Phrase used to ask for more instructions of a pattern.
fn pattern_request(pattern: &str, n: usize) -> String {
    match pattern {
        "plain" => format!("{n} more tasks like examples"),
        "yz_plane" => format!("{n} more tasks that fly the drone in XZ or YZ plane like example 4 in the drone's body frame"),
        "square" => format!("{n} more tasks according to the flight path and pattern from the examples"),
        other => format!("{n} more `{other}` tasks"),
    }
}

impl PromptProfile {
    pub fn new(id: &str, template: &str, counts: &[(&str, usize)], class: ComplexityClass) -> Self {
        Self {
            id: id.into(),
            template: template.into(),
            counts: counts.iter().map(|(p, n)| PatternCount { pattern: p.to_string(), count: *n }).collect(),
            complexity_class: class,
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().map(|c| c.count).sum()
    }

    pub fn validate(&self) -> Result<(), String> {
        let text = template(&self.template).ok_or_else(|| format!("profile {}: unknown template `{}`", self.id, self.template))?;
        if text.trim().is_empty() {
            return Err(format!("profile {}: empty system prompt", self.id));
        }
        if self.counts.is_empty() || self.counts.iter().any(|c| c.count == 0) {
            return Err(format!("profile {}: requested counts must be positive", self.id));
        }
        Ok(())
    }

    /// Template with its `{count:<pattern>}` placeholders filled.
    pub fn system_prompt(&self) -> String {
        let mut text = template(&self.template).unwrap_or_default().to_string();
        for c in &self.counts {
            text = text.replace(&format!("{{count:{}}}", c.pattern), &c.count.to_string());
        }
        text
    }

    /// Follow-up request for the instructions still missing.
    pub fn reprompt(&self, attempt: usize, missing: &[(String, usize)]) -> String {
        let parts: Vec<String> = missing.iter().filter(|(_, n)| *n > 0).map(|(p, n)| pattern_request(p, *n)).collect();
        format!(
            "Attempt {attempt}. Some of your tasks were unusable or missing. Generate {}. Do not repeat earlier tasks. Your output should be tasks only.",
            parts.join(" and ")
        )
    }
}

/// The four generation runs: two complexity profiles, each at training and
/// evaluation size.
pub fn default_profiles() -> Vec<PromptProfile> {
    use ComplexityClass::*;
    vec![
        PromptProfile::new("simple-train", "instructions_simple", &[("plain", 110), ("yz_plane", 12)], Simple),
        PromptProfile::new("complex-train", "instructions_complex", &[("square", 42)], Complex),
        PromptProfile::new("simple-eval", "instructions_simple", &[("plain", 25), ("yz_plane", 3)], Simple),
        PromptProfile::new("complex-eval", "instructions_complex", &[("square", 11)], Complex),
    ]
}
