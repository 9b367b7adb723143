//! Chat-completions client over blocking HTTP with retry and backoff.

use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use tracing::{debug, warn};

use super::{CompletionRequest, LlmError, RemoteConfig};

#[derive(Debug, Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 1],
    temperature: f64,
    max_tokens: u32,
}

#[derive(Debug, Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Debug, Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Debug, Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Debug, Deserialize)]
struct ResponseMessage {
    content: Option<String>,
}

/// Retry schedule for transient failures: `max_retries` extra attempts,
/// waiting `base_delay * 2^n` before retry `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 3,
            base_delay: Duration::from_millis(500),
        }
    }
}

impl RetryPolicy {
    pub fn delay(&self, retry: u32) -> Duration {
        self.base_delay * 2u32.saturating_pow(retry)
    }
}

enum Failure {
    Transient(String),
    Fatal(LlmError),
}

fn is_retryable_status(status: u16) -> bool {
    matches!(status, 408 | 429 | 500 | 502 | 503 | 504)
}

pub(super) struct RemoteClient {
    http: reqwest::blocking::Client,
    config: RemoteConfig,
}

impl RemoteClient {
    pub(super) fn new(config: RemoteConfig) -> Result<Self, LlmError> {
        if config.endpoint.trim().is_empty() {
            return Err(LlmError::InvalidConfig("remote endpoint must not be empty".into()));
        }
        let http = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| LlmError::InvalidConfig(e.to_string()))?;
        Ok(RemoteClient { http, config })
    }

    pub(super) fn complete(&self, req: &CompletionRequest) -> Result<String, LlmError> {
        let credential = match &self.config.credential_env {
            Some(var) => Some(std::env::var(var).map_err(|_| LlmError::MissingCredential(var.clone()))?),
            None => None,
        };
        let body = ChatRequest {
            model: &req.model,
            messages: [ChatMessage {
                role: "user",
                content: &req.prompt,
            }],
            temperature: req.temperature,
            max_tokens: req.max_output_tokens,
        };

        let policy = self.config.retry;
        let mut attempt = 0;
        loop {
            match self.send(&body, credential.as_deref()) {
                Ok(text) => return Ok(text),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Transient(reason)) => {
                    if attempt >= policy.max_retries {
                        warn!(endpoint = %self.config.endpoint, attempts = attempt + 1, "giving up: {reason}");
                        return Err(LlmError::BackendUnreachable {
                            attempts: attempt + 1,
                            reason,
                        });
                    }
                    let wait = policy.delay(attempt);
                    debug!(attempt, ?wait, "transient failure, retrying: {reason}");
                    thread::sleep(wait);
                    attempt += 1;
                }
            }
        }
    }

    fn send(&self, body: &ChatRequest<'_>, credential: Option<&str>) -> Result<String, Failure> {
        let mut request = self.http.post(&self.config.endpoint).json(body);
        if let Some(key) = credential {
            request = request.bearer_auth(key);
        }
        let response = request.send().map_err(|e| Failure::Transient(e.to_string()))?;
        let status = response.status().as_u16();
        if !response.status().is_success() {
            let text = response.text().unwrap_or_default();
            return Err(if is_retryable_status(status) {
                Failure::Transient(format!("HTTP {status}"))
            } else {
                Failure::Fatal(LlmError::Rejected { status, body: text })
            });
        }
        let text = response
            .text()
            .map_err(|e| Failure::Transient(e.to_string()))?;
        extract_content(&text).map_err(Failure::Fatal)
    }
}

/// Text of the first choice's message.
pub fn extract_content(body: &str) -> Result<String, LlmError> {
    let parsed: ChatResponse =
        serde_json::from_str(body).map_err(|e| LlmError::MalformedResponse(e.to_string()))?;
    parsed
        .choices
        .into_iter()
        .next()
        .and_then(|c| c.message.content)
        .ok_or_else(|| LlmError::MalformedResponse("no message content in first choice".into()))
}
