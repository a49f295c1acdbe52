//! Deterministic offline stand-in for the language model.
//!
//! Every reply is a pure function of the request: the random choices are
//! seeded from the request hash. The stand-in plays each role the pipeline
//! needs (task writer, programmer, judge, rewriter) well enough to exercise
//! the filters, retries and corrective rounds end to end without a network.

pub mod tasks;

use std::collections::HashSet;
use std::sync::{Arc, LazyLock};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use roboground_core::dsl::{execute_source, extract_code, Limits};
use roboground_core::{MatchConfig, RobotProfile, Trajectory};
use roboground_llm::{ChatClient, ChatRequest, ChatResponse, ClientError, Role};
use sha2::{Digest, Sha256};

use crate::policy::dedup_key;

pub const SCRIPTED_MODEL: &str = "scripted-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Task {
    Instructions,
    Grounding,
    GroundingJudge,
    RewardJudge,
    Augment,
}

fn classify(system: &str) -> Option<Task> {
    if system.contains("generate drone control tasks") {
        Some(Task::Instructions)
    } else if system.contains("controls a robot through the `aw` API") {
        Some(Task::Grounding)
    } else if system.contains("carries out the given task instruction") {
        Some(Task::GroundingJudge)
    } else if system.contains("compare the intentions") {
        Some(Task::RewardJudge)
    } else if system.contains("real-world drone operation task") {
        Some(Task::Augment)
    } else {
        None
    }
}

fn digest(text: &str) -> [u8; 32] {
    Sha256::digest(text.as_bytes()).into()
}

/// Stable 64-bit hash of a piece of text.
pub fn text_hash(text: &str) -> u64 {
    let d = digest(text);
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

/// The task text this grammar would rewrite on a first attempt with a slip.
pub fn slips_first_round(instruction: &str) -> bool {
    text_hash(instruction).is_multiple_of(7)
}

/// Whether the first rewrite of `query` comes back as two paragraphs.
pub fn splits_first_rewrite(query: &str) -> bool {
    text_hash(query).is_multiple_of(9)
}

#[derive(Debug, Clone, Default)]
pub struct ScriptedClient;

impl ScriptedClient {
    pub fn new() -> Self {
        Self
    }

    pub fn shared() -> Arc<dyn ChatClient> {
        Arc::new(Self)
    }
}

impl ChatClient for ScriptedClient {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        let body = serde_json::to_vec(request).map_err(|e| ClientError::Decode(e.to_string()))?;
        let mut rng = ChaCha8Rng::from_seed(Sha256::digest(&body).into());
        let system = request.system_prompt().unwrap_or_default();
        let content = match classify(system) {
            Some(Task::Instructions) => instructions(request, &mut rng),
            Some(Task::Grounding) => grounding(request),
            Some(Task::GroundingJudge) => grounding_judge(request),
            Some(Task::RewardJudge) => reward_judge(request),
            Some(Task::Augment) => augment(request, &mut rng),
            None => {
                return Err(ClientError::Status {
                    status: 400,
                    body: "scripted model: unrecognized system prompt".into(),
                })
            }
        };
        Ok(ChatResponse { model: SCRIPTED_MODEL.into(), content })
    }

    fn model_id(&self) -> String {
        SCRIPTED_MODEL.into()
    }
}

static COUNT_PLAIN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(\d+) (?:more )?tasks like examples").unwrap());
static COUNT_PLANE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(\d+) (?:more )?tasks that fly the drone in XZ or YZ plane").unwrap());
static COUNT_SQUARE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(\d+) (?:more )?tasks according to the flight path").unwrap());
static ATTEMPT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"Attempt (\d+)").unwrap());

fn count(re: &Regex, user: &str, system: &str) -> usize {
    let grab = |t: &str| re.captures(t).and_then(|c| c[1].parse().ok());
    if COUNT_PLAIN.is_match(user) || COUNT_PLANE.is_match(user) || COUNT_SQUARE.is_match(user) {
        grab(user).unwrap_or(0)
    } else {
        grab(system).unwrap_or(0)
    }
}

fn instructions(request: &ChatRequest, rng: &mut ChaCha8Rng) -> String {
    let system = request.system_prompt().unwrap_or_default();
    let user = request.last_user().unwrap_or_default();
    let attempt: usize = ATTEMPT.captures(user).and_then(|c| c[1].parse().ok()).unwrap_or(1);
    let plain = count(&COUNT_PLAIN, user, system);
    let plane = count(&COUNT_PLANE, user, system);
    let square = count(&COUNT_SQUARE, user, system);

    let mut seen = HashSet::new();
    let mut lines = Vec::new();
    let mut fresh = |rng: &mut ChaCha8Rng, make: &dyn Fn(&mut ChaCha8Rng) -> String| loop {
        let line = make(rng);
        if seen.insert(dedup_key(&line)) {
            return line;
        }
    };
    let simple_line = |rng: &mut ChaCha8Rng, acts: Vec<tasks::Action>| {
        tasks::sentence(&acts.iter().map(|a| tasks::render_clause(a, rng)).collect::<Vec<_>>())
    };
    for _ in 0..plain {
        lines.push(fresh(rng, &|r| {
            let acts = tasks::random_plain(r);
            simple_line(r, acts)
        }));
    }
    for _ in 0..plane {
        lines.push(fresh(rng, &|r| {
            let acts = tasks::random_plane_task(r);
            simple_line(r, acts)
        }));
    }
    for _ in 0..square {
        lines.push(fresh(rng, &|r| tasks::render_square(&tasks::random_square(r))));
    }

    if attempt == 1 && !lines.is_empty() {
        // First drafts carry the usual defects: rule breakers and a repeat.
        let bad: &[&str] = if square > 0 {
            &["Take off and fly up 12 meters. You should fly in a square pattern with 5-meter sides by moving north, east, south, and west in the world axis."]
        } else {
            &[
                "Fly 1 meter up, then rotate 90 degrees clockwise.",
                "Rotate 45 degrees clockwise, then fly 4 meters forward in the drone's body frame.",
            ]
        };
        for (i, b) in bad.iter().enumerate() {
            if i + 1 < lines.len() {
                lines[i + 1] = b.to_string();
            }
        }
        if lines.len() > bad.len() + 2 {
            let n = lines.len();
            lines[n - 1] = lines[0].clone();
        }
        lines.shuffle(rng);
        let body: Vec<String> = lines.iter().enumerate().map(|(i, l)| format!("{}. {l}", i + 1)).collect();
        format!("Here are the tasks:\n\n{}\n", body.join("\n"))
    } else {
        lines.shuffle(rng);
        lines.join("\n") + "\n"
    }
}

fn first_user(request: &ChatRequest) -> &str {
    request.messages.iter().find(|m| m.role == Role::User).map(|m| m.content.as_str()).unwrap_or_default()
}

fn fenced(code: &str) -> String {
    format!("```python\n{}```", code)
}

fn grounding(request: &ChatRequest) -> String {
    let task = first_user(request);
    let task = task.strip_prefix("Task:").unwrap_or(task).trim();
    let round = request.messages.iter().filter(|m| m.role == Role::User).count();
    let slip = round == 1 && slips_first_round(task);
    format!("Here is the program.\n\n{}", fenced(&tasks::translate(task, slip)))
}

fn profile_for(system: &str) -> RobotProfile {
    if system.contains("get_drone_position") {
        RobotProfile::uav()
    } else {
        RobotProfile::ground()
    }
}

fn same_behavior(a: &str, b: &str, profile: RobotProfile) -> bool {
    let profile = Arc::new(profile);
    let (ta, ea) = execute_source::<f64>(a, profile.clone(), Limits::default());
    let (tb, eb) = execute_source::<f64>(b, profile, Limits::default());
    ea.is_none() && eb.is_none() && equivalent(&ta, &tb)
}

fn equivalent(a: &Trajectory, b: &Trajectory) -> bool {
    let cfg = MatchConfig::default();
    let (sa, sb) = (cfg.scored_actions(a), cfg.scored_actions(b));
    sa.len() == sb.len() && cfg.match_sequences(&sa, &sb).iter().all(|&m| m)
}

fn verdict(ok: bool) -> String {
    if ok {
        "The behavior matches.\n1".into()
    } else {
        "The behavior differs.\n0".into()
    }
}

fn grounding_judge(request: &ChatRequest) -> String {
    let user = first_user(request);
    let task = user.strip_prefix("Task:").unwrap_or(user);
    let (task, rest) = task.split_once("\n\nCode:").unwrap_or((task, ""));
    let code = extract_code(rest).unwrap_or_default();
    let system = request.system_prompt().unwrap_or_default();
    verdict(same_behavior(&code, &tasks::translate(task.trim(), false), profile_for(system)))
}

fn reward_judge(request: &ChatRequest) -> String {
    let user = first_user(request);
    let (cand, reference) = user.split_once("Ground truth code:").unwrap_or((user, ""));
    let cand = extract_code(cand).unwrap_or_default();
    let reference = extract_code(reference).unwrap_or_default();
    let system = request.system_prompt().unwrap_or_default();
    verdict(same_behavior(&cand, &reference, profile_for(system)))
}

const SCENARIOS: &[&str] = &[
    "Survey the parking lot behind the warehouse",
    "Check the roof of a storage building for damage",
    "Inspect a cell tower for loose cables",
    "Look over a field of crops after a storm",
    "Scan a bridge support for cracks",
    "Patrol the fence line of a construction site",
    "Inspect the solar panels on a factory roof",
    "Check the gutters of a family house",
    "Survey a riverbank after heavy rain",
    "Inspect the blades of a wind turbine",
    "Record footage of a stadium entrance",
    "Check a billboard for storm damage",
];

const CLOSINGS: &[&str] = &[
    ", so the camera gets a clear view",
    ", keeping the camera pointed at the target",
    ", and hold position for the photos",
    ", and wait there for the next instruction",
];

static QUERY: LazyLock<Regex> = LazyLock::new(|| Regex::new(r#"(?s)Query: "(.*)""#).unwrap());

fn augment(request: &ChatRequest, rng: &mut ChaCha8Rng) -> String {
    let user = first_user(request);
    let query = QUERY.captures(user).map(|c| c[1].to_string()).unwrap_or_else(|| user.to_string());
    let scenario = SCENARIOS.choose(rng).unwrap();
    let body = if tasks::is_square_task(&query) {
        format!("{query} Keep the camera running for the whole flight.")
    } else {
        let clauses: Vec<String> =
            tasks::parse_actions(&query).iter().map(|a| tasks::restate_clause(a, rng)).collect();
        let closing = CLOSINGS.choose(rng).unwrap();
        let mut s = tasks::capitalize(&clauses.join(", then "));
        s.push_str(closing);
        s.push('.');
        s
    };
    let first = request.messages.iter().filter(|m| m.role == Role::User).count() == 1;
    if first && splits_first_rewrite(&query) {
        format!("{scenario}.\n\n{body}")
    } else if rng.gen_bool(0.5) {
        format!("Answer: \"{scenario}. {body}\"")
    } else {
        format!("{scenario}. {body}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use roboground_llm::ChatMessage;

    fn ask(system: &str, user: &str) -> String {
        let req = ChatRequest::new(SCRIPTED_MODEL, vec![ChatMessage::system(system), ChatMessage::user(user)]);
        ScriptedClient.complete(&req).unwrap().content
    }

    #[test]
    fn replies_are_pure_functions_of_the_request() {
        let sys = crate::prompts::default_profiles()[0].system_prompt();
        assert_eq!(ask(&sys, "Generate the tasks."), ask(&sys, "Generate the tasks."));
    }

    #[test]
    fn unknown_prompt_is_an_error() {
        let req = ChatRequest::new(SCRIPTED_MODEL, vec![ChatMessage::system("hello"), ChatMessage::user("hi")]);
        assert!(ScriptedClient.complete(&req).is_err());
    }

    #[test]
    fn reprompt_counts_come_from_the_user_turn() {
        let p = &crate::prompts::default_profiles()[0];
        let reply = ask(&p.system_prompt(), &p.reprompt(2, &[("plain".into(), 3), ("yz_plane".into(), 1)]));
        assert_eq!(reply.lines().count(), 4);
        assert_eq!(reply.lines().filter(|l| l.contains("plane")).count(), 1);
    }
}
