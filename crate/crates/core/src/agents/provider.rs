//! Provider-agnostic chat interface: a live OpenAI-compatible HTTP client
//! and a deterministic offline mock keyed by a stable prompt hash.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::validate::ValidationError;
use crate::context::estimate_tokens;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("invalid chat request: {0}")]
    InvalidRequest(String),
    #[error("provider failure{}: {message}", status.map(|s| format!(" (status {s})")).unwrap_or_default())]
    Provider {
        status: Option<u16>,
        message: String,
    },
    #[error("provider returned an empty completion")]
    EmptyCompletion,
    #[error("validation retries exhausted after {attempts} attempts: {last_error}")]
    RetriesExhausted {
        attempts: u32,
        last_error: ValidationError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseFormat {
    FreeText,
    JsonObject,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub system_prompt: String,
    pub user_prompt: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub response_format_hint: ResponseFormat,
}

impl ChatRequest {
    pub fn validate(&self) -> Result<(), AgentError> {
        if self.system_prompt.trim().is_empty() || self.user_prompt.trim().is_empty() {
            return Err(AgentError::InvalidRequest(
                "prompts must be non-empty".into(),
            ));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(AgentError::InvalidRequest(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FinishReason {
    Stop,
    Length,
    /// Mock provider fallback for a prompt pair with no registered script.
    Unmatched,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatResponse {
    pub text: String,
    pub finish_reason: FinishReason,
    pub prompt_tokens: u32,
    pub completion_tokens: u32,
}

/// A chat-completion backend. Implementations must be safe for concurrent
/// requests.
pub trait ChatProvider: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, AgentError>;
    /// Identifier recorded in report metadata, e.g. `mock:wx-mock-1`.
    fn model_id(&self) -> String;
}

/// Stable FNV-1a hash of a (system, user) prompt pair. Keys mock scripts
/// on disk, so it must never depend on process-random state.
pub fn prompt_hash(system_prompt: &str, user_prompt: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= u64::from(b);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    eat(system_prompt.as_bytes());
    eat(&[0x1f]);
    eat(user_prompt.as_bytes());
    hash
}

/// Separator line between responses in a multi-turn mock script file.
pub const SCRIPT_SEPARATOR: &str = "---RESPONSE---";

/// Deterministic offline provider. Scripts are registered up front (or
/// loaded from a directory of `<prompt-hash>.txt` files) and selected by
/// [`prompt_hash`]; successive calls with the same prompt pair walk the
/// response sequence, repeating the final entry once exhausted. Unmatched
/// prompts get a fixed fallback flagged [`FinishReason::Unmatched`].
pub struct MockProvider {
    scripts: HashMap<u64, Vec<String>>,
    cursors: Mutex<HashMap<u64, usize>>,
    model: String,
}

impl MockProvider {
    pub fn new() -> Self {
        MockProvider {
            scripts: HashMap::new(),
            cursors: Mutex::new(HashMap::new()),
            model: "wx-mock-1".to_string(),
        }
    }

    pub fn with_model(model: impl Into<String>) -> Self {
        MockProvider {
            model: model.into(),
            ..MockProvider::new()
        }
    }

    /// Registers a response sequence for a prompt pair. Setup-time only;
    /// the registry is immutable once the provider is in use.
    pub fn register(&mut self, system_prompt: &str, user_prompt: &str, responses: Vec<String>) {
        self.register_hash(prompt_hash(system_prompt, user_prompt), responses);
    }

    pub fn register_hash(&mut self, hash: u64, responses: Vec<String>) {
        if !responses.is_empty() {
            self.scripts.insert(hash, responses);
        }
    }

    /// Loads every `<16-hex-digit>.txt` script in a directory. Responses
    /// within a file are separated by [`SCRIPT_SEPARATOR`] lines.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, AgentError> {
        let dir = dir.as_ref();
        let mut provider = MockProvider::new();
        let entries = std::fs::read_dir(dir).map_err(|e| AgentError::Provider {
            status: None,
            message: format!("cannot read mock script dir {}: {e}", dir.display()),
        })?;
        for entry in entries {
            let entry = entry.map_err(|e| AgentError::Provider {
                status: None,
                message: e.to_string(),
            })?;
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            let Ok(hash) = u64::from_str_radix(stem, 16) else {
                continue;
            };
            let content = std::fs::read_to_string(&path).map_err(|e| AgentError::Provider {
                status: None,
                message: format!("cannot read {}: {e}", path.display()),
            })?;
            let responses: Vec<String> = content
                .split(&format!("{SCRIPT_SEPARATOR}\n"))
                .map(|part| part.trim_end_matches('\n').to_string())
                .filter(|part| !part.is_empty())
                .collect();
            provider.register_hash(hash, responses);
        }
        Ok(provider)
    }

    pub fn script_file_name(hash: u64) -> String {
        format!("{hash:016x}.txt")
    }
}

impl Default for MockProvider {
    fn default() -> Self {
        Self::new()
    }
}

impl ChatProvider for MockProvider {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, AgentError> {
        request.validate()?;
        let hash = prompt_hash(&request.system_prompt, &request.user_prompt);
        let prompt_tokens = (estimate_tokens(&request.system_prompt)
            + estimate_tokens(&request.user_prompt)) as u32;
        match self.scripts.get(&hash) {
            Some(responses) => {
                let mut cursors = self.cursors.lock().expect("cursor lock");
                let cursor = cursors.entry(hash).or_insert(0);
                let text = responses[(*cursor).min(responses.len() - 1)].clone();
                *cursor += 1;
                Ok(ChatResponse {
                    completion_tokens: estimate_tokens(&text) as u32,
                    text,
                    finish_reason: FinishReason::Stop,
                    prompt_tokens,
                })
            }
            None => {
                let text = format!("{{\"unmatched\": true, \"prompt_hash\": \"{hash:016x}\"}}");
                Ok(ChatResponse {
                    completion_tokens: estimate_tokens(&text) as u32,
                    text,
                    finish_reason: FinishReason::Unmatched,
                    prompt_tokens,
                })
            }
        }
    }

    fn model_id(&self) -> String {
        format!("mock:{}", self.model)
    }
}

/// OpenAI-compatible chat-completions client. Base URL and model are
/// configurable; the key comes from `LLM_API_KEY` unless set explicitly.
pub struct HttpProvider {
    base_url: String,
    model: String,
    api_key: Option<String>,
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: Vec<WireMessage<'a>>,
    temperature: f64,
    max_tokens: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    response_format: Option<serde_json::Value>,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireResponseMessage,
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct WireResponseMessage {
    content: Option<String>,
}

#[derive(Deserialize)]
struct WireUsage {
    prompt_tokens: u32,
    completion_tokens: u32,
}

impl HttpProvider {
    pub fn new(
        base_url: impl Into<String>,
        model: impl Into<String>,
        api_key: Option<String>,
    ) -> Self {
        HttpProvider {
            base_url: base_url.into(),
            model: model.into(),
            api_key: api_key.or_else(|| std::env::var("LLM_API_KEY").ok()),
        }
    }
}

impl ChatProvider for HttpProvider {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, AgentError> {
        request.validate()?;
        let key = self
            .api_key
            .as_deref()
            .ok_or_else(|| AgentError::Provider {
                status: None,
                message: "no API key configured (set LLM_API_KEY)".into(),
            })?;
        let body = WireRequest {
            model: &self.model,
            messages: vec![
                WireMessage {
                    role: "system",
                    content: &request.system_prompt,
                },
                WireMessage {
                    role: "user",
                    content: &request.user_prompt,
                },
            ],
            temperature: request.temperature,
            max_tokens: request.max_output_tokens,
            response_format: match request.response_format_hint {
                ResponseFormat::JsonObject => Some(serde_json::json!({"type": "json_object"})),
                ResponseFormat::FreeText => None,
            },
        };
        let url = format!("{}/chat/completions", self.base_url.trim_end_matches('/'));
        let response = ureq::post(&url)
            .set("Authorization", &format!("Bearer {key}"))
            .set("Content-Type", "application/json")
            .send_string(&serde_json::to_string(&body).expect("serializable request"));
        let response = match response {
            Ok(r) => r,
            Err(ureq::Error::Status(status, r)) => {
                return Err(AgentError::Provider {
                    status: Some(status),
                    message: r.into_string().unwrap_or_default(),
                })
            }
            Err(ureq::Error::Transport(t)) => {
                return Err(AgentError::Provider {
                    status: None,
                    message: t.to_string(),
                })
            }
        };
        let body = response.into_string().map_err(|e| AgentError::Provider {
            status: None,
            message: e.to_string(),
        })?;
        let wire: WireResponse = serde_json::from_str(&body).map_err(|e| AgentError::Provider {
            status: None,
            message: e.to_string(),
        })?;
        let choice = wire
            .choices
            .into_iter()
            .next()
            .ok_or(AgentError::EmptyCompletion)?;
        let text = choice.message.content.unwrap_or_default();
        if text.trim().is_empty() {
            return Err(AgentError::EmptyCompletion);
        }
        let finish_reason = match choice.finish_reason.as_deref() {
            Some("length") => FinishReason::Length,
            _ => FinishReason::Stop,
        };
        let (prompt_tokens, completion_tokens) = wire
            .usage
            .map(|u| (u.prompt_tokens, u.completion_tokens))
            .unwrap_or_else(|| {
                (
                    (estimate_tokens(&request.system_prompt)
                        + estimate_tokens(&request.user_prompt)) as u32,
                    estimate_tokens(&text) as u32,
                )
            });
        Ok(ChatResponse {
            text,
            finish_reason,
            prompt_tokens,
            completion_tokens,
        })
    }

    fn model_id(&self) -> String {
        self.model.clone()
    }
}
