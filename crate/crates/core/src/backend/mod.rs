//! Provider-agnostic chat-completion access with a hard input-token budget
//! gate, retrying transport, per-call logging, and a deterministic scripted
//! double for offline runs.

mod http;
mod recording;
mod scripted;

pub use http::HttpTransport;
pub use recording::RecordingTransport;
pub use scripted::{respond_scripted, ScriptDefault, ScriptedResponder, ScriptedTransport};

use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model_id: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_output_tokens: u32,
}

impl ChatRequest {
    /// Joined content of every message, the unit the budget gate measures.
    pub fn joined_content(&self) -> String {
        self.messages
            .iter()
            .map(|m| m.content.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn last_user_content(&self) -> Option<&str> {
        self.messages
            .iter()
            .rev()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FinishReason {
    Completed,
    Truncated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub content: String,
    pub input_token_count: usize,
    pub output_token_count: usize,
    pub finish_reason: FinishReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub backoff_base_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_attempts: 3, backoff_base_ms: 500 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Remote,
    Scripted,
}

/// Connection and budget settings for one backend role (feature extraction
/// or generation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendProfile {
    pub kind: BackendKind,
    pub model_id: String,
    #[serde(default)]
    pub endpoint: String,
    /// Name of the environment variable holding the API credential.
    #[serde(default)]
    pub credential_env: Option<String>,
    #[serde(default = "default_budget")]
    pub input_token_budget: usize,
    #[serde(default)]
    pub retry: RetryPolicy,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    #[serde(default = "default_max_output")]
    pub max_output_tokens: u32,
}

fn default_budget() -> usize {
    8000
}

fn default_in_flight() -> usize {
    4
}

fn default_max_output() -> u32 {
    1024
}

impl BackendProfile {
    pub fn scripted(model_id: &str) -> Self {
        Self {
            kind: BackendKind::Scripted,
            model_id: model_id.to_owned(),
            endpoint: String::new(),
            credential_env: None,
            input_token_budget: default_budget(),
            retry: RetryPolicy { max_attempts: 3, backoff_base_ms: 0 },
            max_in_flight: default_in_flight(),
            max_output_tokens: default_max_output(),
        }
    }

    /// A single-user-message request carrying this profile's model id, at
    /// temperature 0 for reproducibility.
    pub fn user_request(&self, prompt: &str) -> ChatRequest {
        ChatRequest {
            model_id: self.model_id.clone(),
            messages: vec![ChatMessage { role: Role::User, content: prompt.to_owned() }],
            temperature: 0.0,
            max_output_tokens: self.max_output_tokens,
        }
    }
}

/// Deterministic token estimate: ceil(character count / 4). Monotone
/// non-decreasing under concatenation.
pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

/// Stable digest of a request: model, temperature, and every message.
/// Equal digests mean byte-equal prompts against the same model.
pub fn request_digest(request: &ChatRequest) -> String {
    let mut canonical = String::new();
    canonical.push_str(&request.model_id);
    canonical.push('\x1f');
    canonical.push_str(&format!("{:.4}", request.temperature));
    for message in &request.messages {
        canonical.push('\x1e');
        canonical.push_str(match message.role {
            Role::System => "system",
            Role::User => "user",
        });
        canonical.push('\x1f');
        canonical.push_str(&message.content);
    }
    crate::hash::sha256_hex(canonical)
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("estimated {estimated} input tokens exceeds budget {budget}")]
    BudgetExceeded { estimated: usize, budget: usize },
    #[error("retries exhausted after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: String },
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("no script entry for digest {digest} and no default transform")]
    UnmatchedScript { digest: String },
    #[error("credential variable `{0}` is not set")]
    MissingCredential(String),
}

/// Error surfaced by a transport; `transient` failures are retried.
#[derive(Debug, Clone)]
pub struct TransportError {
    pub transient: bool,
    pub status: Option<u16>,
    pub message: String,
}

impl TransportError {
    pub fn transient(message: impl Into<String>) -> Self {
        Self { transient: true, status: None, message: message.into() }
    }

    pub fn fatal(message: impl Into<String>) -> Self {
        Self { transient: false, status: None, message: message.into() }
    }
}

pub trait Transport: Send + Sync {
    fn send(&self, request: &ChatRequest) -> Result<ChatResponse, TransportError>;
}

/// One completed (or failed-through) backend call, for the run manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CallRecord {
    pub digest: String,
    pub model_id: String,
    pub kind: BackendKind,
    pub input_tokens: usize,
    pub output_tokens: usize,
    pub attempts: u32,
    pub latency_ms: u64,
    pub truncated: bool,
}

/// Thread-shareable chat client: budget gate, bounded in-flight requests,
/// exponential-backoff retries, and an append-only call log.
pub struct BackendClient {
    profile: BackendProfile,
    transport: Box<dyn Transport>,
    permits: Semaphore,
    log: Mutex<Vec<CallRecord>>,
}

impl BackendClient {
    pub fn new(profile: BackendProfile, transport: Box<dyn Transport>) -> Self {
        let permits = Semaphore::new(profile.max_in_flight.max(1));
        Self { profile, transport, permits, log: Mutex::new(Vec::new()) }
    }

    pub fn profile(&self) -> &BackendProfile {
        &self.profile
    }

    /// Completes a request. Requests whose estimated input tokens exceed
    /// the profile budget are rejected before any transport activity.
    pub fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        if !request.messages.iter().any(|m| m.role == Role::User) {
            return Err(BackendError::InvalidRequest("no user message".into()));
        }
        if !(request.temperature >= 0.0) {
            return Err(BackendError::InvalidRequest("temperature must be >= 0".into()));
        }
        let estimated = estimate_tokens(&request.joined_content());
        if estimated > self.profile.input_token_budget {
            return Err(BackendError::BudgetExceeded {
                estimated,
                budget: self.profile.input_token_budget,
            });
        }

        let _permit = self.permits.acquire();
        let started = Instant::now();
        let mut last_error = String::new();
        for attempt in 1..=self.profile.retry.max_attempts {
            match self.transport.send(request) {
                Ok(response) => {
                    self.push_record(request, &response, attempt, started);
                    return Ok(response);
                }
                Err(e) if e.transient && attempt < self.profile.retry.max_attempts => {
                    last_error = e.message;
                    let delay = backoff_delay(&self.profile.retry, attempt);
                    if !delay.is_zero() {
                        std::thread::sleep(delay);
                    }
                }
                Err(e) if e.transient => {
                    return Err(BackendError::RetriesExhausted {
                        attempts: self.profile.retry.max_attempts,
                        last: e.message,
                    });
                }
                Err(e) => return Err(BackendError::Transport(e.message)),
            }
        }
        Err(BackendError::RetriesExhausted {
            attempts: self.profile.retry.max_attempts,
            last: last_error,
        })
    }

    fn push_record(
        &self,
        request: &ChatRequest,
        response: &ChatResponse,
        attempts: u32,
        started: Instant,
    ) {
        self.log.lock().unwrap().push(CallRecord {
            digest: request_digest(request),
            model_id: request.model_id.clone(),
            kind: self.profile.kind,
            input_tokens: response.input_token_count,
            output_tokens: response.output_token_count,
            attempts,
            latency_ms: started.elapsed().as_millis() as u64,
            truncated: response.finish_reason == FinishReason::Truncated,
        });
    }

    pub fn call_records(&self) -> Vec<CallRecord> {
        self.log.lock().unwrap().clone()
    }

    pub fn call_count(&self) -> usize {
        self.log.lock().unwrap().len()
    }
}

/// Backoff before retry `attempt` (1-based): base * 2^(attempt-1).
pub fn backoff_delay(policy: &RetryPolicy, attempt: u32) -> Duration {
    Duration::from_millis(policy.backoff_base_ms.saturating_mul(1u64 << (attempt - 1).min(16)))
}

struct Semaphore {
    state: Mutex<usize>,
    available: Condvar,
}

struct Permit<'a>(&'a Semaphore);

impl Semaphore {
    fn new(permits: usize) -> Self {
        Self { state: Mutex::new(permits), available: Condvar::new() }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.state.lock().unwrap();
        while *free == 0 {
            free = self.available.wait(free).unwrap();
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.state.lock().unwrap() += 1;
        self.0.available.notify_one();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicU32, Ordering};

    struct Flaky {
        failures: AtomicU32,
    }

    impl Transport for Flaky {
        fn send(&self, request: &ChatRequest) -> Result<ChatResponse, TransportError> {
            if self.failures.fetch_update(Ordering::SeqCst, Ordering::SeqCst, |f| {
                (f > 0).then(|| f - 1)
            }).is_ok()
            {
                return Err(TransportError { transient: true, status: Some(429), message: "rate limited".into() });
            }
            Ok(ChatResponse {
                content: "ok".into(),
                input_token_count: estimate_tokens(&request.joined_content()),
                output_token_count: 1,
                finish_reason: FinishReason::Completed,
            })
        }
    }

    fn profile(budget: usize, max_attempts: u32) -> BackendProfile {
        BackendProfile {
            retry: RetryPolicy { max_attempts, backoff_base_ms: 0 },
            input_token_budget: budget,
            ..BackendProfile::scripted("test-model")
        }
    }

    #[test]
    fn estimate_tokens_examples() {
        assert_eq!(estimate_tokens(""), 0);
        assert_eq!(estimate_tokens(&"x".repeat(400)), 100);
        assert_eq!(estimate_tokens("abcde"), 2);
    }

    #[test]
    fn over_budget_request_never_reaches_the_transport() {
        let (transport, sends) = RecordingTransport::new(Flaky { failures: AtomicU32::new(0) });
        let client = BackendClient::new(profile(10, 3), Box::new(transport));
        // 41 chars estimate to 11 tokens: one over the budget of 10.
        let request = client.profile().user_request(&"y".repeat(41));
        match client.complete(&request) {
            Err(BackendError::BudgetExceeded { estimated: 11, budget: 10 }) => {}
            other => panic!("expected budget error, got {other:?}"),
        }
        assert_eq!(sends.load(Ordering::SeqCst), 0);
        assert_eq!(client.call_count(), 0);
    }

    #[test]
    fn exactly_at_budget_goes_through() {
        let client = BackendClient::new(
            profile(10, 3),
            Box::new(Flaky { failures: AtomicU32::new(0) }),
        );
        let request = client.profile().user_request(&"y".repeat(40));
        assert!(client.complete(&request).is_ok());
    }

    #[test]
    fn two_failures_then_success_records_three_attempts() {
        let client = BackendClient::new(
            profile(1000, 3),
            Box::new(Flaky { failures: AtomicU32::new(2) }),
        );
        let request = client.profile().user_request("hello");
        client.complete(&request).unwrap();
        let records = client.call_records();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].attempts, 3);
    }

    #[test]
    fn retries_exhausted_carries_last_message() {
        let client = BackendClient::new(
            profile(1000, 2),
            Box::new(Flaky { failures: AtomicU32::new(5) }),
        );
        let request = client.profile().user_request("hello");
        match client.complete(&request) {
            Err(BackendError::RetriesExhausted { attempts: 2, last }) => {
                assert!(last.contains("rate limited"));
            }
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn backoff_delays_are_non_decreasing() {
        let policy = RetryPolicy { max_attempts: 6, backoff_base_ms: 100 };
        let delays: Vec<_> = (1..6).map(|a| backoff_delay(&policy, a)).collect();
        assert!(delays.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(delays[0], Duration::from_millis(100));
        assert_eq!(delays[1], Duration::from_millis(200));
    }

    #[test]
    fn request_without_user_message_is_invalid() {
        let client = BackendClient::new(
            profile(1000, 1),
            Box::new(Flaky { failures: AtomicU32::new(0) }),
        );
        let request = ChatRequest {
            model_id: "m".into(),
            messages: vec![ChatMessage { role: Role::System, content: "s".into() }],
            temperature: 0.0,
            max_output_tokens: 16,
        };
        assert!(matches!(
            client.complete(&request),
            Err(BackendError::InvalidRequest(_))
        ));
    }
}
