//! OpenAI-compatible chat-completions client and answer normalization.

use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use log::{debug, warn};
use rand::Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::transcript::{AnswerLabel, DecodeConfig, Transcript};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    pub base_url: String,
    pub model_name: String,
    #[serde(default = "default_api_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_max_in_flight")]
    pub max_in_flight: usize,
    #[serde(default = "default_retry_limit")]
    pub retry_limit: u32,
    #[serde(default = "default_backoff_base_ms")]
    pub backoff_base_ms: u64,
}

fn default_api_key_env() -> String {
    "OPENAI_API_KEY".to_string()
}
fn default_max_in_flight() -> usize {
    4
}
fn default_retry_limit() -> u32 {
    5
}
fn default_backoff_base_ms() -> u64 {
    500
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>, model_name: impl Into<String>) -> Self {
        EndpointConfig {
            base_url: base_url.into(),
            model_name: model_name.into(),
            api_key_env: default_api_key_env(),
            max_in_flight: default_max_in_flight(),
            retry_limit: default_retry_limit(),
            backoff_base_ms: default_backoff_base_ms(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        url::Url::parse(&self.base_url)
            .map_err(|e| Error::Config(format!("base_url `{}`: {e}", self.base_url)))?;
        if self.model_name.is_empty() {
            return Err(Error::Config("model_name must not be empty".into()));
        }
        if self.max_in_flight == 0 {
            return Err(Error::Config("max_in_flight must be at least 1".into()));
        }
        if self.backoff_base_ms == 0 {
            return Err(Error::Config("backoff_base_ms must be positive".into()));
        }
        Ok(())
    }

    pub fn completions_url(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawCompletion {
    /// Assistant message content, untrimmed.
    pub text: String,
    pub latency_ms: u64,
    pub http_status: u16,
    pub attempts: u32,
}

/// Counting semaphore bounding concurrent requests.
#[derive(Debug)]
pub struct InFlightLimiter {
    limit: usize,
    current: Mutex<usize>,
    freed: Condvar,
}

pub struct InFlightPermit<'a> {
    limiter: &'a InFlightLimiter,
}

impl InFlightLimiter {
    pub fn new(limit: usize) -> Self {
        InFlightLimiter {
            limit: limit.max(1),
            current: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> InFlightPermit<'_> {
        let mut current = self.current.lock().expect("limiter poisoned");
        while *current >= self.limit {
            current = self.freed.wait(current).expect("limiter poisoned");
        }
        *current += 1;
        InFlightPermit { limiter: self }
    }

    pub fn in_flight(&self) -> usize {
        *self.current.lock().expect("limiter poisoned")
    }
}

impl Drop for InFlightPermit<'_> {
    fn drop(&mut self) {
        let mut current = self.limiter.current.lock().expect("limiter poisoned");
        *current -= 1;
        self.limiter.freed.notify_one();
    }
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: crate::transcript::Role,
    content: &'a str,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: Vec<WireMessage<'a>>,
    temperature: f64,
    top_p: f64,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireChoiceMessage,
}

#[derive(Deserialize)]
struct WireChoiceMessage {
    content: Option<String>,
}

/// A configured endpoint with one shared in-flight limiter.
pub struct Gateway {
    cfg: EndpointConfig,
    api_key: String,
    http: ureq::Agent,
    limiter: InFlightLimiter,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway")
            .field("cfg", &self.cfg)
            .field("api_key", &"<redacted>")
            .finish()
    }
}

impl Gateway {
    /// Validates the config and resolves the API key from the environment.
    pub fn new(cfg: EndpointConfig) -> Result<Self> {
        cfg.validate()?;
        let api_key = std::env::var(&cfg.api_key_env).map_err(|_| {
            Error::Config(format!(
                "API key environment variable `{}` is not set",
                cfg.api_key_env
            ))
        })?;
        let http: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(300)))
            .build()
            .into();
        let limiter = InFlightLimiter::new(cfg.max_in_flight);
        Ok(Gateway {
            cfg,
            api_key,
            http,
            limiter,
        })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.cfg
    }

    pub fn chat_complete(
        &self,
        transcript: &Transcript,
        decode: &DecodeConfig,
    ) -> Result<RawCompletion> {
        transcript.pending_user()?;
        let body = WireRequest {
            model: &self.cfg.model_name,
            messages: transcript
                .messages
                .iter()
                .map(|m| WireMessage {
                    role: m.role,
                    content: &m.content,
                })
                .collect(),
            temperature: decode.temperature,
            top_p: decode.top_p,
        };
        let payload = serde_json::to_string(&body)?;
        let url = self.cfg.completions_url();
        debug!("POST {url} trial={} body={payload}", transcript.trial_id);

        let mut attempt: u32 = 0;
        loop {
            let started = Instant::now();
            let outcome = {
                let _permit = self.limiter.acquire();
                self.http
                    .post(&url)
                    .header("Authorization", &format!("Bearer {}", self.api_key))
                    .header("Content-Type", "application/json")
                    .send(payload.as_bytes())
                    .and_then(|mut resp| {
                        let status = resp.status().as_u16();
                        resp.body_mut().read_to_string().map(|text| (status, text))
                    })
            };
            let latency_ms = started.elapsed().as_millis() as u64;

            let (retryable, last_status, last_message) = match outcome {
                Ok((status, text)) if (200..300).contains(&status) => {
                    debug!("response trial={} status={status} body={text}", transcript.trial_id);
                    let parsed: WireResponse = serde_json::from_str(&text).map_err(|e| {
                        Error::Protocol(format!("malformed completion payload: {e}"))
                    })?;
                    let content = parsed
                        .choices
                        .into_iter()
                        .next()
                        .and_then(|c| c.message.content)
                        .ok_or_else(|| Error::Protocol("completion has no choices".into()))?;
                    return Ok(RawCompletion {
                        text: content,
                        latency_ms,
                        http_status: status,
                        attempts: attempt + 1,
                    });
                }
                Ok((status, text)) => (
                    status == 429 || (500..600).contains(&status),
                    Some(status),
                    text,
                ),
                Err(e) => (true, None, e.to_string()),
            };

            if !retryable || attempt >= self.cfg.retry_limit {
                return Err(Error::Transport {
                    status: last_status,
                    message: format!(
                        "{} after {} attempt(s): {}",
                        url,
                        attempt + 1,
                        truncate(&last_message, 200)
                    ),
                });
            }
            let delay = backoff_delay(self.cfg.backoff_base_ms, attempt);
            warn!(
                "trial {}: attempt {} failed (status {:?}), retrying in {:?}",
                transcript.trial_id,
                attempt + 1,
                last_status,
                delay
            );
            std::thread::sleep(delay);
            attempt += 1;
        }
    }
}

/// `base · 2^attempt`, scaled by a uniform jitter factor in [0.5, 1.0].
pub fn backoff_delay(base_ms: u64, attempt: u32) -> Duration {
    let nominal = base_ms.saturating_mul(1u64 << attempt.min(20));
    let factor: f64 = rand::thread_rng().gen_range(0.5..=1.0);
    Duration::from_millis((nominal as f64 * factor).round() as u64)
}

fn truncate(s: &str, max: usize) -> &str {
    match s.char_indices().nth(max) {
        Some((idx, _)) => &s[..idx],
        None => s,
    }
}

/// One-shot completion against `cfg`.
pub fn chat_complete(
    cfg: &EndpointConfig,
    transcript: &Transcript,
    decode: &DecodeConfig,
) -> Result<RawCompletion> {
    Gateway::new(cfg.clone())?.chat_complete(transcript, decode)
}

/// First standalone `yes` or `no` token, case-insensitive, punctuation stripped.
pub fn classify_yes_no(text: &str) -> AnswerLabel {
    for token in text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
    {
        if token.eq_ignore_ascii_case("yes") {
            return AnswerLabel::Yes;
        }
        if token.eq_ignore_ascii_case("no") {
            return AnswerLabel::No;
        }
    }
    AnswerLabel::Unparseable
}

/// All base-10 integer literals, in order of appearance.
pub fn extract_final_integers(text: &str) -> Vec<i64> {
    static INTEGER: OnceLock<Regex> = OnceLock::new();
    let re = INTEGER.get_or_init(|| Regex::new(r"\d+").expect("valid regex"));
    re.find_iter(text)
        .filter_map(|m| m.as_str().parse::<i64>().ok())
        .collect()
}
