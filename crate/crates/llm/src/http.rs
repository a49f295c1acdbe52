use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::{ChatClient, ChatRequest, ChatResponse, ClientError};

pub const DEFAULT_API_KEY_ENV: &str = "ROBOGROUND_API_KEY";

/// Connection settings for an OpenAI-compatible endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    pub api_key_env: String,
    pub timeout_secs: u64,
    /// Extra attempts after a retryable failure.
    pub max_retries: u32,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            base_url: "https://api.openai.com/v1".into(),
            model: "o4-mini".into(),
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            timeout_secs: 120,
            max_retries: 3,
        }
    }
}

pub struct HttpClient {
    config: LlmConfig,
    api_key: String,
    http: reqwest::blocking::Client,
}

impl HttpClient {
    /// Reads the API key from the configured environment variable.
    pub fn from_env(config: LlmConfig) -> Result<Self, ClientError> {
        let api_key = std::env::var(&config.api_key_env)
            .map_err(|_| ClientError::Auth(format!("environment variable {} is not set", config.api_key_env)))?;
        Self::with_key(config, api_key)
    }

    pub fn with_key(config: LlmConfig, api_key: impl Into<String>) -> Result<Self, ClientError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        Ok(Self { config, api_key: api_key.into(), http })
    }

    pub fn config(&self) -> &LlmConfig {
        &self.config
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    fn attempt(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        let mut body = json!({
            "model": request.model,
            "messages": request.messages,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        });
        if let Some(seed) = request.seed {
            body["seed"] = json!(seed);
        }
        let resp = self
            .http
            .post(self.endpoint())
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp.text().map_err(|e| ClientError::Transport(e.to_string()))?;
        match status {
            200..=299 => parse_completion(&text, &request.model),
            401 | 403 => Err(ClientError::Auth(text)),
            _ => Err(ClientError::Status { status, body: text }),
        }
    }
}

#[derive(Deserialize)]
struct CompletionBody {
    #[serde(default)]
    model: Option<String>,
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    #[serde(default)]
    content: Option<String>,
}

/// Extracts the first choice of an OpenAI-style completion body.
pub(crate) fn parse_completion(text: &str, requested_model: &str) -> Result<ChatResponse, ClientError> {
    let body: CompletionBody = serde_json::from_str(text).map_err(|e| ClientError::Decode(e.to_string()))?;
    let choice = body.choices.into_iter().next().ok_or_else(|| ClientError::Decode("no choices returned".into()))?;
    Ok(ChatResponse {
        model: body.model.unwrap_or_else(|| requested_model.to_string()),
        content: choice.message.content.unwrap_or_default(),
    })
}

impl ChatClient for HttpClient {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        let mut delay = Duration::from_millis(500);
        let mut attempt = 0;
        loop {
            match self.attempt(request) {
                Err(e) if e.is_retryable() && attempt < self.config.max_retries => {
                    tracing::warn!(attempt, error = %e, "chat completion failed, retrying");
                    std::thread::sleep(delay);
                    delay *= 2;
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    fn model_id(&self) -> String {
        self.config.model.clone()
    }

    fn is_live(&self) -> bool {
        true
    }
}
