//! Questioner, answerer and summarizer backends.
//!
//! A [`BackendDescriptor`] says what to talk to; [`Backend::connect`] turns it
//! into a live handle. Handles implement [`TextBackend`] (questioner and
//! summarizer) and/or [`VisionBackend`] (answerer).

mod http;
mod retry;
mod scripted;

use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use http::{ChatClient, VqaClient, IMAGE_UNAVAILABLE_CODE};
pub use retry::RetryPolicy;
pub use scripted::{OnExhausted, ScriptedBackend, ScriptedBehavior};

pub const DEFAULT_AUTH_ENV_VAR: &str = "OPENAI_API_KEY";
pub const MAX_TEMPERATURE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Questioner,
    Answerer,
    Summarizer,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Questioner => "questioner",
            Role::Answerer => "answerer",
            Role::Summarizer => "summarizer",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    ChatHttp,
    VqaHttp,
    Scripted,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::ChatHttp => "chat_http",
            BackendKind::VqaHttp => "vqa_http",
            BackendKind::Scripted => "scripted",
        })
    }
}

#[derive(Debug, Error)]
pub enum BackendError {
    /// `status` is `None` when no HTTP response was received at all.
    #[error("transport failure (status {status:?}): {body}")]
    Transport { status: Option<u16>, body: String },
    #[error("environment variable {0} holding the API key is not set")]
    AuthMissing(String),
    #[error("scripted responses exhausted")]
    ScriptExhausted,
    #[error("answerer cannot load image {0}")]
    ImageUnavailable(String),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("{kind} backend does not support {operation}")]
    Unsupported { kind: BackendKind, operation: &'static str },
    #[error("empty prompt context")]
    EmptyContext,
    #[error("invalid backend descriptor: {0}")]
    InvalidDescriptor(String),
}

/// Where and how to reach one model role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendDescriptor {
    pub role: Role,
    pub kind: BackendKind,
    #[serde(default)]
    pub endpoint: String,
    #[serde(default)]
    pub model_id: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_ms: u64,
    pub max_retries: u32,
    /// Initial retry delay; doubles on every further attempt.
    pub backoff_ms: u64,
    /// Name of the variable holding the bearer token. Never the token itself.
    #[serde(default)]
    pub auth_env_var: Option<String>,
    #[serde(default)]
    pub script: Option<ScriptedBehavior>,
}

impl BackendDescriptor {
    /// Defaults for a role: questions are sampled at temperature 1.0, answers
    /// and summaries greedily.
    pub fn defaults_for(role: Role) -> Self {
        let (kind, temperature, max_tokens) = match role {
            Role::Questioner => (BackendKind::ChatHttp, 1.0, 128),
            Role::Answerer => (BackendKind::VqaHttp, 0.0, 64),
            Role::Summarizer => (BackendKind::ChatHttp, 0.0, 256),
        };
        Self {
            role,
            kind,
            endpoint: String::new(),
            model_id: String::new(),
            temperature,
            max_tokens,
            timeout_ms: 60_000,
            max_retries: 3,
            backoff_ms: 500,
            auth_env_var: None,
            script: None,
        }
    }

    pub fn scripted(role: Role, behavior: ScriptedBehavior) -> Self {
        Self {
            kind: BackendKind::Scripted,
            model_id: format!("scripted-{role}"),
            script: Some(behavior),
            ..Self::defaults_for(role)
        }
    }

    /// Stable identifier recorded in transcripts.
    pub fn id(&self) -> String {
        if self.model_id.is_empty() {
            self.kind.to_string()
        } else {
            format!("{}:{}", self.kind, self.model_id)
        }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }

    pub fn retry_policy(&self) -> RetryPolicy {
        RetryPolicy::new(self.max_retries, Duration::from_millis(self.backoff_ms))
    }

    pub fn auth_env_var(&self) -> &str {
        self.auth_env_var.as_deref().unwrap_or(DEFAULT_AUTH_ENV_VAR)
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        let invalid = |msg: String| Err(BackendError::InvalidDescriptor(format!("{}: {msg}", self.role)));
        if !(0.0..=MAX_TEMPERATURE).contains(&self.temperature) {
            return invalid(format!(
                "temperature {} outside [0, {MAX_TEMPERATURE}]",
                self.temperature
            ));
        }
        if self.max_tokens < 1 {
            return invalid("max_tokens must be at least 1".into());
        }
        match self.kind {
            BackendKind::Scripted => {
                if !self.endpoint.is_empty() {
                    return invalid("scripted backends must not set endpoint".into());
                }
                if self.auth_env_var.as_deref().is_some_and(|v| !v.is_empty()) {
                    return invalid("scripted backends must not set auth_env_var".into());
                }
                match &self.script {
                    Some(s) if !s.responses.is_empty() => {}
                    Some(_) => return invalid("script.responses must not be empty".into()),
                    None => return invalid("scripted backends need a script".into()),
                }
            }
            BackendKind::ChatHttp | BackendKind::VqaHttp => {
                if let Err(e) = url::Url::parse(&self.endpoint) {
                    return invalid(format!("endpoint {:?} is not a URL: {e}", self.endpoint));
                }
                if self.model_id.is_empty() && self.kind == BackendKind::ChatHttp {
                    return invalid("model_id is required for chat_http".into());
                }
                if self.script.is_some() {
                    return invalid("script is only valid for scripted backends".into());
                }
            }
        }
        let role_ok = match self.role {
            Role::Answerer => self.kind != BackendKind::ChatHttp,
            Role::Questioner | Role::Summarizer => self.kind != BackendKind::VqaHttp,
        };
        if !role_ok {
            return invalid(format!("kind {} cannot serve this role", self.kind));
        }
        Ok(())
    }
}

/// Text-in, text-out completion (questioner and summarizer).
pub trait TextBackend: Send + Sync {
    fn complete_text(&self, context: &str) -> Result<String, BackendError>;
}

/// Image-grounded answering (answerer).
pub trait VisionBackend: Send + Sync {
    fn answer_visual(&self, image_ref: &str, context: &str) -> Result<String, BackendError>;
}

/// A live handle built from a descriptor.
#[derive(Debug)]
pub enum Backend {
    Chat(ChatClient),
    Vqa(VqaClient),
    Scripted(ScriptedBackend),
}

impl Backend {
    pub fn connect(descriptor: &BackendDescriptor) -> Result<Self, BackendError> {
        descriptor.validate()?;
        Ok(match descriptor.kind {
            BackendKind::ChatHttp => Backend::Chat(ChatClient::new(descriptor)?),
            BackendKind::VqaHttp => Backend::Vqa(VqaClient::new(descriptor)?),
            BackendKind::Scripted => {
                let script = descriptor.script.clone().expect("validated");
                Backend::Scripted(ScriptedBackend::new(script)?)
            }
        })
    }

    pub fn kind(&self) -> BackendKind {
        match self {
            Backend::Chat(_) => BackendKind::ChatHttp,
            Backend::Vqa(_) => BackendKind::VqaHttp,
            Backend::Scripted(_) => BackendKind::Scripted,
        }
    }
}

impl TextBackend for Backend {
    fn complete_text(&self, context: &str) -> Result<String, BackendError> {
        if context.is_empty() {
            return Err(BackendError::EmptyContext);
        }
        match self {
            Backend::Chat(c) => c.complete_text(context),
            Backend::Scripted(s) => s.next_response(),
            Backend::Vqa(_) => Err(BackendError::Unsupported {
                kind: BackendKind::VqaHttp,
                operation: "complete_text",
            }),
        }
    }
}

impl VisionBackend for Backend {
    fn answer_visual(&self, image_ref: &str, context: &str) -> Result<String, BackendError> {
        match self {
            Backend::Vqa(v) => v.answer_visual(image_ref, context),
            Backend::Scripted(s) => s.answer_visual(image_ref),
            Backend::Chat(_) => Err(BackendError::Unsupported {
                kind: BackendKind::ChatHttp,
                operation: "answer_visual",
            }),
        }
    }
}
