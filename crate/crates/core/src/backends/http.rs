//! HTTP transports: OpenAI-compatible chat completions and a minimal VQA
//! endpoint.
//!
//! Chat: `POST {endpoint}/chat/completions` with
//! `{model, messages: [{role: "user", content}], temperature, max_tokens}`,
//! answer read from `choices[0].message.content`.
//!
//! VQA: `POST {endpoint}/vqa` with `{image_ref, prompt, temperature,
//! max_tokens}`, answer read from `{answer}`. A body of
//! `{"error": "image_unavailable"}` (any non-5xx status) maps to
//! [`BackendError::ImageUnavailable`].

use reqwest::blocking::{Client, RequestBuilder, Response};
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};

use super::retry::{Attempt, RetryPolicy};
use super::{BackendDescriptor, BackendError, BackendKind};

pub const IMAGE_UNAVAILABLE_CODE: &str = "image_unavailable";

fn build_client(descriptor: &BackendDescriptor) -> Result<Client, BackendError> {
    Client::builder()
        .timeout(descriptor.timeout())
        .build()
        .map_err(|e| BackendError::InvalidDescriptor(format!("http client: {e}")))
}

fn join_url(endpoint: &str, path: &str) -> String {
    format!("{}/{}", endpoint.trim_end_matches('/'), path)
}

fn is_transient(status: StatusCode) -> bool {
    status == StatusCode::TOO_MANY_REQUESTS || status.is_server_error()
}

/// Sends the request, retrying connection errors, 429 and 5xx. Returns the
/// status and body of the final response.
fn send_with_retries(
    policy: &RetryPolicy,
    mut request: impl FnMut() -> RequestBuilder,
) -> Result<(StatusCode, String), BackendError> {
    policy.run(|_| {
        let response: Response = match request().send() {
            Ok(r) => r,
            Err(e) if e.is_builder() => {
                return Attempt::Fatal(BackendError::Transport {
                    status: None,
                    body: e.to_string(),
                })
            }
            Err(e) => {
                return Attempt::Transient(BackendError::Transport {
                    status: None,
                    body: e.to_string(),
                })
            }
        };
        let status = response.status();
        match response.text() {
            Ok(body) if status.is_success() => Attempt::Done((status, body)),
            Ok(body) if is_transient(status) => Attempt::Transient(BackendError::Transport {
                status: Some(status.as_u16()),
                body,
            }),
            Ok(body) => Attempt::Done((status, body)),
            Err(e) => Attempt::Transient(BackendError::Transport {
                status: Some(status.as_u16()),
                body: e.to_string(),
            }),
        }
    })
}

fn bearer_token(var: &str) -> Result<String, BackendError> {
    match std::env::var(var) {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(BackendError::AuthMissing(var.to_string())),
    }
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 1],
    temperature: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatResponseMessage,
}

#[derive(Deserialize)]
struct ChatResponseMessage {
    content: Option<String>,
}

#[derive(Debug)]
pub struct ChatClient {
    http: Client,
    url: String,
    model: String,
    temperature: f64,
    max_tokens: u32,
    auth_env_var: String,
    retry: RetryPolicy,
}

impl ChatClient {
    pub fn new(descriptor: &BackendDescriptor) -> Result<Self, BackendError> {
        debug_assert_eq!(descriptor.kind, BackendKind::ChatHttp);
        Ok(Self {
            http: build_client(descriptor)?,
            url: join_url(&descriptor.endpoint, "chat/completions"),
            model: descriptor.model_id.clone(),
            temperature: descriptor.temperature,
            max_tokens: descriptor.max_tokens,
            auth_env_var: descriptor.auth_env_var().to_string(),
            retry: descriptor.retry_policy(),
        })
    }

    /// Sends `context` as a single user message and returns the first
    /// choice's content.
    pub fn complete_text(&self, context: &str) -> Result<String, BackendError> {
        let token = bearer_token(&self.auth_env_var)?;
        let body = ChatRequest {
            model: &self.model,
            messages: [ChatMessage {
                role: "user",
                content: context,
            }],
            temperature: self.temperature,
            max_tokens: self.max_tokens,
        };
        let (status, text) = send_with_retries(&self.retry, || {
            self.http.post(&self.url).bearer_auth(&token).json(&body)
        })?;
        if !status.is_success() {
            return Err(BackendError::Transport {
                status: Some(status.as_u16()),
                body: text,
            });
        }
        let parsed: ChatResponse =
            serde_json::from_str(&text).map_err(|e| BackendError::MalformedResponse(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| BackendError::MalformedResponse("no choices[0].message.content".into()))
    }
}

#[derive(Serialize)]
struct VqaRequest<'a> {
    image_ref: &'a str,
    prompt: &'a str,
    temperature: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct VqaResponse {
    #[serde(default)]
    answer: Option<String>,
    #[serde(default)]
    error: Option<String>,
}

#[derive(Debug)]
pub struct VqaClient {
    http: Client,
    url: String,
    temperature: f64,
    max_tokens: u32,
    auth_env_var: Option<String>,
    retry: RetryPolicy,
}

impl VqaClient {
    pub fn new(descriptor: &BackendDescriptor) -> Result<Self, BackendError> {
        debug_assert_eq!(descriptor.kind, BackendKind::VqaHttp);
        Ok(Self {
            http: build_client(descriptor)?,
            url: join_url(&descriptor.endpoint, "vqa"),
            temperature: descriptor.temperature,
            max_tokens: descriptor.max_tokens,
            auth_env_var: descriptor.auth_env_var.clone().filter(|v| !v.is_empty()),
            retry: descriptor.retry_policy(),
        })
    }

    pub fn answer_visual(&self, image_ref: &str, context: &str) -> Result<String, BackendError> {
        let token = self.auth_env_var.as_deref().map(bearer_token).transpose()?;
        let body = VqaRequest {
            image_ref,
            prompt: context,
            temperature: self.temperature,
            max_tokens: self.max_tokens,
        };
        let (status, text) = send_with_retries(&self.retry, || {
            let req = self.http.post(&self.url).json(&body);
            match &token {
                Some(t) => req.bearer_auth(t),
                None => req,
            }
        })?;
        let parsed: Option<VqaResponse> = serde_json::from_str(&text).ok();
        if parsed
            .as_ref()
            .and_then(|p| p.error.as_deref())
            .is_some_and(|e| e == IMAGE_UNAVAILABLE_CODE)
        {
            return Err(BackendError::ImageUnavailable(image_ref.to_string()));
        }
        if !status.is_success() {
            return Err(BackendError::Transport {
                status: Some(status.as_u16()),
                body: text,
            });
        }
        parsed
            .and_then(|p| p.answer)
            .ok_or_else(|| BackendError::MalformedResponse(format!("no `answer` field in {text:?}")))
    }
}
