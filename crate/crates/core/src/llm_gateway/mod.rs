//! Completion backends: a deterministic mock and a remote chat endpoint.

pub mod mock;
mod parse;
mod remote;

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use thiserror::Error;

pub use parse::{parse_label, parse_rating};
pub use remote::{extract_content, RetryPolicy};

pub const DEFAULT_MAX_IN_FLIGHT: usize = 4;
pub const DEFAULT_MAX_OUTPUT_TOKENS: u32 = 64;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("backend unreachable after {attempts} attempts: {reason}")]
    BackendUnreachable { attempts: u32, reason: String },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("backend rejected request with HTTP {status}: {body}")]
    Rejected { status: u16, body: String },
    #[error("credential variable `{0}` is not set")]
    MissingCredential(String),
    #[error("invalid backend configuration: {0}")]
    InvalidConfig(String),
    #[error("could not parse answer: {0}")]
    ParseFailure(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest {
    pub prompt: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub model: String,
}

impl CompletionRequest {
    pub fn new(prompt: impl Into<String>, model: impl Into<String>) -> Self {
        CompletionRequest {
            prompt: prompt.into(),
            temperature: 0.0,
            max_output_tokens: DEFAULT_MAX_OUTPUT_TOKENS,
            model: model.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemoteConfig {
    pub endpoint: String,
    /// Name of the environment variable holding the API key, if any.
    pub credential_env: Option<String>,
    pub retry: RetryPolicy,
    pub max_in_flight: usize,
    pub timeout: Duration,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        RemoteConfig {
            endpoint: endpoint.into(),
            credential_env: None,
            retry: RetryPolicy::default(),
            max_in_flight: DEFAULT_MAX_IN_FLIGHT,
            timeout: Duration::from_secs(60),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BackendKind {
    Mock,
    Remote(RemoteConfig),
}

/// Counting semaphore bounding concurrent remote requests.
struct InFlight {
    free: Mutex<usize>,
    released: Condvar,
}

impl InFlight {
    fn new(permits: usize) -> Self {
        InFlight {
            free: Mutex::new(permits.max(1)),
            released: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.released.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self)
    }
}

struct Permit<'a>(&'a InFlight);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.released.notify_one();
    }
}

enum Inner {
    Mock,
    Remote(remote::RemoteClient, InFlight),
}

/// Shared, thread-safe handle to one backend.
pub struct Gateway {
    inner: Inner,
}

impl Gateway {
    pub fn new(backend: BackendKind) -> Result<Self, LlmError> {
        let inner = match backend {
            BackendKind::Mock => Inner::Mock,
            BackendKind::Remote(cfg) => {
                let permits = cfg.max_in_flight;
                Inner::Remote(remote::RemoteClient::new(cfg)?, InFlight::new(permits))
            }
        };
        Ok(Gateway { inner })
    }

    pub fn mock() -> Self {
        Gateway { inner: Inner::Mock }
    }

    pub fn is_mock(&self) -> bool {
        matches!(self.inner, Inner::Mock)
    }

    pub fn complete(&self, req: &CompletionRequest) -> Result<String, LlmError> {
        if req.temperature.is_nan() || req.temperature < 0.0 {
            return Err(LlmError::InvalidConfig(format!(
                "temperature must be non-negative, got {}",
                req.temperature
            )));
        }
        match &self.inner {
            Inner::Mock => Ok(mock::complete(&req.prompt)),
            Inner::Remote(client, limit) => {
                let _permit = limit.acquire();
                client.complete(req)
            }
        }
    }
}

/// One-shot completion against `backend`.
pub fn complete(req: &CompletionRequest, backend: &BackendKind) -> Result<String, LlmError> {
    Gateway::new(backend.clone())?.complete(req)
}
