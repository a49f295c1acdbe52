//! LLM equivalence judge: prompt construction and verdict parsing.

use std::sync::Arc;

use roboground_core::sim::{ApiKind, RobotProfile};
use roboground_llm::{ChatClient, ChatMessage, ChatRequest, ClientError};

pub const REWARD_JUDGE_TEMPLATE: &str = include_str!("../prompts/reward_judge.txt");
pub const GROUNDING_JUDGE_TEMPLATE: &str = include_str!("../prompts/grounding_judge.txt");

/// Reason attached when no verdict could be read from the judge.
pub const UNPARSEABLE: &str = "judge_unparseable";

/// Extra attempts after an unparseable reply.
pub const DEFAULT_JUDGE_RETRIES: u32 = 2;

fn describe(name: &str, kind: ApiKind) -> String {
    match kind {
        ApiKind::Takeoff => format!("aw.{name}() - takes off the drone."),
        ApiKind::Land => format!("aw.{name}() - lands the drone."),
        ApiKind::FlyTo => format!(
            "aw.{name}([x, y, z]) - flies the drone to the position specified as a list of three arguments corresponding to world XYZ coordinates. The flying speed is 2 meters per second."
        ),
        ApiKind::GetYaw => format!("aw.{name}() - returns the current yaw of the drone in degrees."),
        ApiKind::SetYaw => format!("aw.{name}(yaw) - sets the yaw of the drone to the specified value in degrees."),
        ApiKind::GetPosition => format!(
            "aw.{name}() - returns the current position of the robot as a list of floats corresponding to world coordinates."
        ),
        ApiKind::MoveForward => {
            format!("aw.{name}(d) - drives the vehicle d meters along its current heading (negative values reverse).")
        }
        ApiKind::Rotate => format!("aw.{name}(deg) - turns the vehicle by deg degrees, clockwise positive."),
        ApiKind::GetHeading => {
            format!("aw.{name}() - returns the current heading of the vehicle in degrees, clockwise from north.")
        }
    }
}

/// One line per callable, in profile order.
pub fn api_reference(profile: &RobotProfile) -> String {
    let mut lines: Vec<String> = profile.api.iter().map(|a| describe(&a.name, a.kind)).collect();
    if profile.name == "uav" {
        // The stock drone lists its position query with three coordinates.
        for line in &mut lines {
            if line.starts_with("aw.get_drone_position()") {
                *line = "aw.get_drone_position() - returns the current position of the drone as a list of 3 floats corresponding to world XYZ coordinates.".into();
            }
        }
    }
    lines.join("\n\n")
}

pub fn fill(template: &str, profile: &RobotProfile) -> String {
    template.replace("{api_reference}", &api_reference(profile))
}

/// Last whitespace-separated token that is exactly `0` or `1` once
/// surrounding punctuation is trimmed.
pub fn parse_verdict(reply: &str) -> Option<u8> {
    reply
        .split_whitespace()
        .rev()
        .map(|tok| tok.trim_matches(|c: char| !c.is_ascii_alphanumeric()))
        .find_map(|tok| match tok {
            "0" => Some(0),
            "1" => Some(1),
            _ => None,
        })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    /// `None` when every attempt was unparseable.
    pub value: Option<u8>,
    pub attempts: u32,
    pub transcript: String,
}

impl Verdict {
    pub fn reward(&self) -> u8 {
        self.value.unwrap_or(0)
    }
}

/// Binary judge backed by any chat client.
#[derive(Clone)]
pub struct Judge {
    client: Arc<dyn ChatClient>,
    model: String,
    retries: u32,
}

impl Judge {
    pub fn new(client: Arc<dyn ChatClient>) -> Self {
        let model = client.model_id();
        Self { client, model, retries: DEFAULT_JUDGE_RETRIES }
    }

    pub fn with_retries(mut self, retries: u32) -> Self {
        self.retries = retries;
        self
    }

    pub fn model_id(&self) -> &str {
        &self.model
    }

    pub fn client(&self) -> &Arc<dyn ChatClient> {
        &self.client
    }

    /// Candidate code against reference code.
    pub fn compare_code(&self, profile: &RobotProfile, candidate: &str, reference: &str) -> Result<Verdict, ClientError> {
        let system = fill(REWARD_JUDGE_TEMPLATE, profile);
        let user = format!("Code:\n```python\n{candidate}\n```\n\nGround truth code:\n```python\n{reference}\n```");
        self.ask(system, user)
    }

    /// Candidate code against a natural-language instruction, with the
    /// simulated trajectory attached.
    pub fn check_grounding(
        &self,
        profile: &RobotProfile,
        instruction: &str,
        code: &str,
        trajectory_table: &str,
    ) -> Result<Verdict, ClientError> {
        let system = fill(GROUNDING_JUDGE_TEMPLATE, profile);
        let user = format!(
            "Task: {instruction}\n\nCode:\n```python\n{code}\n```\n\nSimulated transitions:\n{trajectory_table}"
        );
        self.ask(system, user)
    }

    fn ask(&self, system: String, user: String) -> Result<Verdict, ClientError> {
        let mut messages = vec![ChatMessage::system(system), ChatMessage::user(user)];
        let mut transcript = String::new();
        for attempt in 0..=self.retries {
            let mut request = ChatRequest::new(self.model.clone(), messages.clone());
            request.max_tokens = 512;
            let reply = self.client.complete(&request)?.content;
            transcript.push_str(&format!("[judge attempt {}]\n{}\n", attempt + 1, reply.trim_end()));
            if let Some(v) = parse_verdict(&reply) {
                return Ok(Verdict { value: Some(v), attempts: attempt + 1, transcript });
            }
            messages.push(ChatMessage::assistant(reply));
            messages.push(ChatMessage::user("Reply with a single character: 0 or 1."));
        }
        Ok(Verdict { value: None, attempts: self.retries + 1, transcript })
    }
}
