//! Minimal chat-completion contract shared by the synthesis pipeline and the
//! reward judge.
//!
//! Every backend implements [`ChatClient`]. [`HttpClient`] talks to any
//! OpenAI-compatible `/chat/completions` endpoint, [`Recorder`] persists a
//! transcript of every exchange, and [`ReplayClient`] answers from those
//! transcripts so a recorded run can be reproduced offline.

mod http;
mod transcript;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use http::{HttpClient, LlmConfig, DEFAULT_API_KEY_ENV};
pub use transcript::{request_key, Recorder, ReplayClient, Transcript, TranscriptStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_tokens: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ChatRequest {
    pub fn new(model: impl Into<String>, messages: Vec<ChatMessage>) -> Self {
        Self { model: model.into(), messages, temperature: 0.0, max_tokens: 1024, seed: None }
    }

    pub fn system_prompt(&self) -> Option<&str> {
        self.messages.iter().find(|m| m.role == Role::System).map(|m| m.content.as_str())
    }

    pub fn last_user(&self) -> Option<&str> {
        self.messages.iter().rev().find(|m| m.role == Role::User).map(|m| m.content.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub model: String,
    pub content: String,
}

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("endpoint returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("could not decode completion: {0}")]
    Decode(String),
    #[error("no recorded transcript for request {key}")]
    MissingTranscript { key: String },
    #[error("transcript I/O: {0}")]
    Io(#[from] std::io::Error),
}

impl ClientError {
    /// Whether repeating the same request may succeed.
    pub fn is_retryable(&self) -> bool {
        match self {
            ClientError::Transport(_) => true,
            ClientError::Status { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

/// A chat-completion backend. Implementations must be safe to share across
/// worker threads.
pub trait ChatClient: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError>;

    /// Model id reported in dataset provenance.
    fn model_id(&self) -> String;

    /// Whether calls leave the machine; offline clients yield reproducible runs.
    fn is_live(&self) -> bool {
        false
    }
}

impl<C: ChatClient + ?Sized> ChatClient for Arc<C> {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        (**self).complete(request)
    }

    fn model_id(&self) -> String {
        (**self).model_id()
    }

    fn is_live(&self) -> bool {
        (**self).is_live()
    }
}

impl<C: ChatClient + ?Sized> ChatClient for Box<C> {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        (**self).complete(request)
    }

    fn model_id(&self) -> String {
        (**self).model_id()
    }

    fn is_live(&self) -> bool {
        (**self).is_live()
    }
}

/// Answers every request with a function of the request. Used for tests and
/// for deterministic stand-in models.
pub struct FnClient<F> {
    model: String,
    respond: F,
}

impl<F> FnClient<F>
where
    F: Fn(&ChatRequest) -> Result<String, ClientError> + Send + Sync,
{
    pub fn new(model: impl Into<String>, respond: F) -> Self {
        Self { model: model.into(), respond }
    }
}

impl<F> ChatClient for FnClient<F>
where
    F: Fn(&ChatRequest) -> Result<String, ClientError> + Send + Sync,
{
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        let content = (self.respond)(request)?;
        Ok(ChatResponse { model: self.model.clone(), content })
    }

    fn model_id(&self) -> String {
        self.model.clone()
    }
}
