//! Blocking client for chat-completion endpoints.
//!
//! Requests go to `{base_url}/chat/completions` with the usual
//! `{"model", "messages", "temperature", "max_tokens"}` body and the reply is
//! read from `choices[0].message.content`.

use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use planeval_core::rng::{seeded, Rng};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

/// Environment variable holding the endpoint key unless configured otherwise.
pub const DEFAULT_API_KEY_ENV: &str = "PLANEVAL_API_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChatEndpointConfig {
    pub base_url: String,
    pub model_name: String,
    /// Name of the environment variable that holds the key.
    pub api_key_env: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_seconds: u64,
    pub max_retries: u32,
    pub requests_per_minute: Option<u32>,
    /// First retry delay; doubles on every further retry.
    pub backoff_base_ms: u64,
    /// Relative jitter applied to every retry delay, at most 0.5.
    pub jitter: f64,
}

impl Default for ChatEndpointConfig {
    fn default() -> Self {
        Self {
            base_url: "https://api.openai.com/v1".into(),
            model_name: String::new(),
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            temperature: 0.0,
            max_tokens: 2048,
            timeout_seconds: 120,
            max_retries: 4,
            requests_per_minute: None,
            backoff_base_ms: 1000,
            jitter: 0.25,
        }
    }
}

impl ChatEndpointConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.model_name.is_empty() {
            return Err("endpoint model_name is empty".into());
        }
        if self.timeout_seconds == 0 {
            return Err("timeout_seconds must be at least 1".into());
        }
        if !(self.temperature >= 0.0) {
            return Err(format!("temperature {} is negative", self.temperature));
        }
        if self.max_tokens == 0 {
            return Err("max_tokens must be positive".into());
        }
        if !(0.0..=0.5).contains(&self.jitter) {
            return Err(format!("jitter {} outside [0, 0.5]", self.jitter));
        }
        if self.requests_per_minute == Some(0) {
            return Err("requests_per_minute must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: String,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: "system".into(), content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: "user".into(), content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: "assistant".into(), content: content.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatReply {
    pub text: String,
    pub usage: Option<TokenUsage>,
    /// Failed attempts before this reply.
    pub retries: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChatError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("request timed out after {attempts} attempts")]
    Timeout { attempts: u32 },
    #[error("gave up after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: String },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("endpoint rejected the request with status {status}: {body}")]
    Rejected { status: u16, body: String },
}

/// Time source for pacing and backoff. Tests substitute a fake clock.
pub trait Clock: Send + Sync {
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
}

pub struct SystemClock {
    origin: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        Self { origin: Instant::now() }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }
}

/// Delay before retry number `retry` (1-based): `base * 2^(retry-1) * (1 + jitter * u)`
/// with `u` in `[-1, 1]`.
pub fn backoff_delay(base: Duration, retry: u32, jitter: f64, u: f64) -> Duration {
    let factor = 2f64.powi(retry.saturating_sub(1).min(30) as i32) * (1.0 + jitter * u.clamp(-1.0, 1.0));
    base.mul_f64(factor.max(0.0))
}

/// Token bucket holding at most one token, refilled at the configured rate.
/// Callers reserve a slot under the lock and sleep outside it.
struct Pacer {
    interval: Duration,
    next_free: Duration,
}

impl Pacer {
    fn reserve(&mut self, now: Duration) -> Duration {
        let slot = self.next_free.max(now);
        self.next_free = slot + self.interval;
        slot - now
    }
}

enum Attempt {
    Done(ChatReply),
    Retry { reason: String, timed_out: bool },
    Fatal(ChatError),
}

/// Thread-safe client; share it behind an `Arc` across workers.
pub struct ChatClient {
    config: ChatEndpointConfig,
    agent: ureq::Agent,
    clock: Arc<dyn Clock>,
    pacer: Option<Mutex<Pacer>>,
    jitter_rng: Mutex<Rng>,
}

impl ChatClient {
    pub fn new(config: ChatEndpointConfig) -> Self {
        Self::with_clock(config, Arc::new(SystemClock::default()), 0)
    }

    /// `jitter_seed` fixes the jitter sequence.
    pub fn with_clock(config: ChatEndpointConfig, clock: Arc<dyn Clock>, jitter_seed: u64) -> Self {
        let agent_config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_seconds.max(1))))
            .http_status_as_error(false)
            .build();
        let pacer = config.requests_per_minute.filter(|&r| r > 0).map(|rpm| {
            Mutex::new(Pacer {
                interval: Duration::from_secs_f64(60.0 / f64::from(rpm)),
                next_free: Duration::ZERO,
            })
        });
        Self {
            agent: ureq::Agent::new_with_config(agent_config),
            config,
            clock,
            pacer,
            jitter_rng: Mutex::new(seeded(jitter_seed)),
        }
    }

    pub fn config(&self) -> &ChatEndpointConfig {
        &self.config
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    fn pace(&self) {
        if let Some(p) = &self.pacer {
            let wait = p.lock().expect("pacer lock").reserve(self.clock.now());
            if !wait.is_zero() {
                self.clock.sleep(wait);
            }
        }
    }

    /// Sends `messages` and returns the assistant text. Transport failures,
    /// 429 and 5xx responses are retried with exponential backoff; missing or
    /// rejected credentials are not.
    pub fn complete(&self, messages: &[Message]) -> Result<ChatReply, ChatError> {
        let key = std::env::var(&self.config.api_key_env)
            .ok()
            .filter(|k| !k.is_empty())
            .ok_or_else(|| ChatError::Auth(format!("environment variable {} is not set", self.config.api_key_env)))?;
        if messages.is_empty() {
            return Err(ChatError::MalformedResponse("no messages to send".into()));
        }
        let body = serde_json::json!({
            "model": self.config.model_name,
            "messages": messages,
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_tokens,
        })
        .to_string();

        let mut all_timeouts = true;
        let mut last = String::new();
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                let u = self.jitter_rng.lock().expect("jitter lock").gen_range(-1.0..=1.0);
                let base = Duration::from_millis(self.config.backoff_base_ms);
                self.clock.sleep(backoff_delay(base, attempt, self.config.jitter, u));
            }
            self.pace();
            match self.attempt(&key, &body, attempt) {
                Attempt::Done(reply) => return Ok(reply),
                Attempt::Fatal(e) => return Err(e),
                Attempt::Retry { reason, timed_out } => {
                    all_timeouts &= timed_out;
                    last = reason;
                }
            }
        }
        let attempts = self.config.max_retries + 1;
        if all_timeouts {
            Err(ChatError::Timeout { attempts })
        } else {
            Err(ChatError::RetriesExhausted { attempts, last })
        }
    }

    fn attempt(&self, key: &str, body: &str, retries: u32) -> Attempt {
        let response = self
            .agent
            .post(&self.url())
            .header("Authorization", &format!("Bearer {key}"))
            .header("Content-Type", "application/json")
            .send(body);
        let mut response = match response {
            Ok(r) => r,
            Err(ureq::Error::Timeout(_)) => {
                return Attempt::Retry { reason: "timeout".into(), timed_out: true };
            }
            Err(e) => return Attempt::Retry { reason: e.to_string(), timed_out: false },
        };
        let status = response.status().as_u16();
        let text = match response.body_mut().read_to_string() {
            Ok(t) => t,
            Err(ureq::Error::Timeout(_)) => {
                return Attempt::Retry { reason: "timeout".into(), timed_out: true };
            }
            Err(e) => return Attempt::Retry { reason: e.to_string(), timed_out: false },
        };
        match status {
            200..=299 => match parse_reply(&text) {
                Ok((content, usage)) => Attempt::Done(ChatReply { text: content, usage, retries }),
                Err(e) => Attempt::Fatal(e),
            },
            401 | 403 => Attempt::Fatal(ChatError::Auth(format!("status {status}"))),
            429 | 500..=599 => Attempt::Retry { reason: format!("status {status}"), timed_out: false },
            _ => Attempt::Fatal(ChatError::Rejected { status, body: text }),
        }
    }
}

/// Extracts the first choice's content and the token counts.
pub fn parse_reply(body: &str) -> Result<(String, Option<TokenUsage>), ChatError> {
    let value: serde_json::Value =
        serde_json::from_str(body).map_err(|e| ChatError::MalformedResponse(format!("not JSON: {e}")))?;
    let content = value
        .pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .ok_or_else(|| ChatError::MalformedResponse("missing choices[0].message.content".into()))?;
    let usage = value.get("usage").and_then(|u| {
        Some(TokenUsage {
            prompt_tokens: u.get("prompt_tokens")?.as_u64()?,
            completion_tokens: u.get("completion_tokens")?.as_u64()?,
        })
    });
    Ok((content.to_string(), usage))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backoff_schedule() {
        let base = Duration::from_secs(1);
        assert_eq!(backoff_delay(base, 1, 0.5, 0.0), Duration::from_secs(1));
        assert_eq!(backoff_delay(base, 3, 0.5, 0.0), Duration::from_secs(4));
        assert_eq!(backoff_delay(base, 2, 0.5, 1.0), Duration::from_secs(3));
        assert_eq!(backoff_delay(base, 2, 0.5, -1.0), Duration::from_secs(1));
    }

    #[test]
    fn pacer_spaces_requests() {
        let mut p = Pacer { interval: Duration::from_secs(2), next_free: Duration::ZERO };
        assert_eq!(p.reserve(Duration::ZERO), Duration::ZERO);
        assert_eq!(p.reserve(Duration::ZERO), Duration::from_secs(2));
        assert_eq!(p.reserve(Duration::from_secs(1)), Duration::from_secs(3));
        assert_eq!(p.reserve(Duration::from_secs(10)), Duration::ZERO);
    }

    #[test]
    fn reply_parsing() {
        let (text, usage) =
            parse_reply(r#"{"choices":[{"message":{"role":"assistant","content":"hi"}}],"usage":{"prompt_tokens":3,"completion_tokens":1}}"#)
                .unwrap();
        assert_eq!(text, "hi");
        assert_eq!(usage, Some(TokenUsage { prompt_tokens: 3, completion_tokens: 1 }));
        assert!(matches!(parse_reply("{}"), Err(ChatError::MalformedResponse(_))));
        assert!(matches!(parse_reply("<html>"), Err(ChatError::MalformedResponse(_))));
    }

    #[test]
    fn missing_key_is_auth_error() {
        let client = ChatClient::new(ChatEndpointConfig {
            base_url: "http://127.0.0.1:9".into(),
            model_name: "m".into(),
            api_key_env: "PLANEVAL_TEST_KEY_THAT_IS_NEVER_SET".into(),
            ..ChatEndpointConfig::default()
        });
        assert!(matches!(client.complete(&[Message::user("x")]), Err(ChatError::Auth(_))));
    }
}
