//! Blocking completion client with retry, concurrency limiting, and
//! fixture record/replay.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const DEFAULT_MAX_TOKENS: u32 = 2048;
pub const DEFAULT_PATH: &str = "/v1/completions";

#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    #[error("endpoint not configured")]
    NotConfigured,
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("request failed after {attempts} attempts: {last}")]
    Exhausted { attempts: u32, last: String },
    #[error("endpoint returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response envelope: {0}")]
    Envelope(String),
    #[error("no fixture for request {key} in {dir}")]
    MissingFixture { key: String, dir: String },
    #[error("fixture i/o: {0}")]
    Fixture(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: String,
    pub max_tokens: u32,
    pub temperature: f64,
    pub model: String,
}

impl CompletionRequest {
    pub fn new(model: impl Into<String>, prompt: impl Into<String>) -> Self {
        CompletionRequest {
            prompt: prompt.into(),
            max_tokens: DEFAULT_MAX_TOKENS,
            temperature: 0.0,
            model: model.into(),
        }
    }

    pub fn validate(&self) -> Result<(), TransportError> {
        if self.max_tokens < 1 {
            return Err(TransportError::InvalidRequest("max_tokens must be at least 1".into()));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(TransportError::InvalidRequest(format!(
                "temperature must be a finite non-negative number, got {}",
                self.temperature
            )));
        }
        Ok(())
    }

    /// Stable key for fixture files: sha256 of the canonical JSON encoding.
    pub fn fixture_key(&self) -> String {
        let canonical = serde_json::to_string(self).expect("request serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

pub trait CompletionClient: Send + Sync {
    fn complete(&self, req: &CompletionRequest) -> Result<String, TransportError>;
}

// ------------------------------------------------------------ http

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpConfig {
    pub endpoint: String,
    pub path: String,
    pub api_key: Option<String>,
    /// Header carrying the key. `Authorization` gets a `Bearer ` prefix.
    pub auth_header: String,
    pub max_attempts: u32,
    pub initial_backoff_ms: u64,
    pub max_backoff_ms: u64,
    pub timeout_ms: u64,
    pub max_in_flight: usize,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            endpoint: String::new(),
            path: DEFAULT_PATH.into(),
            api_key: None,
            auth_header: "Authorization".into(),
            max_attempts: 5,
            initial_backoff_ms: 500,
            max_backoff_ms: 30_000,
            timeout_ms: 120_000,
            max_in_flight: 4,
        }
    }
}

impl HttpConfig {
    /// Fills endpoint and key from `MODEL_ENDPOINT` / `MODEL_API_KEY` when unset.
    pub fn with_env(mut self) -> Self {
        if self.endpoint.is_empty() {
            if let Ok(e) = std::env::var("MODEL_ENDPOINT") {
                self.endpoint = e;
            }
        }
        if self.api_key.is_none() {
            self.api_key = std::env::var("MODEL_API_KEY").ok();
        }
        self
    }

    pub fn url(&self) -> String {
        format!(
            "{}/{}",
            self.endpoint.trim_end_matches('/'),
            self.path.trim_start_matches('/')
        )
    }
}

struct Semaphore {
    count: Mutex<usize>,
    cv: Condvar,
}

struct Permit<'a>(&'a Semaphore);

impl Semaphore {
    fn new(n: usize) -> Self {
        Semaphore {
            count: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut c = self.count.lock().unwrap_or_else(|e| e.into_inner());
        while *c == 0 {
            c = self.cv.wait(c).unwrap_or_else(|e| e.into_inner());
        }
        *c -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.count.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

pub struct HttpClient {
    cfg: HttpConfig,
    agent: ureq::Agent,
    slots: Semaphore,
}

enum Attempt {
    Done(String),
    Retry(String),
    Fatal(TransportError),
}

/// Pulls the completion text out of a response body.
pub fn parse_envelope(body: &str) -> Result<String, TransportError> {
    let v: Value = serde_json::from_str(body).map_err(|e| TransportError::Envelope(e.to_string()))?;
    let choice = v
        .get("choices")
        .and_then(|c| c.get(0))
        .ok_or_else(|| TransportError::Envelope("no choices[0]".into()))?;
    choice
        .get("text")
        .and_then(Value::as_str)
        .or_else(|| choice.pointer("/message/content").and_then(Value::as_str))
        .map(str::to_string)
        .ok_or_else(|| TransportError::Envelope("choices[0] has neither text nor message.content".into()))
}

fn retriable(status: u16) -> bool {
    status == 429 || status == 408 || (500..600).contains(&status)
}

impl HttpClient {
    pub fn new(cfg: HttpConfig) -> Result<Self, TransportError> {
        if cfg.endpoint.is_empty() {
            return Err(TransportError::NotConfigured);
        }
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_millis(cfg.timeout_ms)))
            .build()
            .into();
        let slots = Semaphore::new(cfg.max_in_flight);
        Ok(HttpClient { cfg, agent, slots })
    }

    pub fn config(&self) -> &HttpConfig {
        &self.cfg
    }

    fn attempt(&self, body: &str) -> Attempt {
        let mut req = self
            .agent
            .post(&self.cfg.url())
            .header("Content-Type", "application/json");
        if let Some(key) = &self.cfg.api_key {
            let value = if self.cfg.auth_header.eq_ignore_ascii_case("authorization") {
                format!("Bearer {key}")
            } else {
                key.clone()
            };
            req = req.header(&self.cfg.auth_header, &value);
        }
        let mut resp = match req.send(body) {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(e.to_string()),
        };
        let status = resp.status().as_u16();
        let text = match resp.body_mut().read_to_string() {
            Ok(t) => t,
            Err(e) => return Attempt::Retry(e.to_string()),
        };
        if (200..300).contains(&status) {
            match parse_envelope(&text) {
                Ok(t) => Attempt::Done(t),
                Err(e) => Attempt::Fatal(e),
            }
        } else if retriable(status) {
            Attempt::Retry(format!("status {status}"))
        } else {
            Attempt::Fatal(TransportError::Status { status, body: text })
        }
    }
}

impl CompletionClient for HttpClient {
    fn complete(&self, req: &CompletionRequest) -> Result<String, TransportError> {
        req.validate()?;
        let body = serde_json::to_string(req).expect("request serializes");
        let _permit = self.slots.acquire();
        let mut backoff = self.cfg.initial_backoff_ms;
        let mut last = String::new();
        for n in 1..=self.cfg.max_attempts.max(1) {
            match self.attempt(&body) {
                Attempt::Done(t) => return Ok(t),
                Attempt::Fatal(e) => return Err(e),
                Attempt::Retry(why) => last = why,
            }
            if n < self.cfg.max_attempts {
                thread::sleep(Duration::from_millis(backoff));
                backoff = (backoff * 2).min(self.cfg.max_backoff_ms);
            }
        }
        Err(TransportError::Exhausted {
            attempts: self.cfg.max_attempts.max(1),
            last,
        })
    }
}

// ------------------------------------------------------------ fixtures

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub request: CompletionRequest,
    pub response: String,
}

pub fn fixture_path(dir: &Path, req: &CompletionRequest) -> PathBuf {
    dir.join(format!("{}.json", req.fixture_key()))
}

pub fn write_fixture(dir: &Path, req: &CompletionRequest, response: &str) -> Result<PathBuf, TransportError> {
    let io = |e: std::io::Error| TransportError::Fixture(e.to_string());
    fs::create_dir_all(dir).map_err(io)?;
    let path = fixture_path(dir, req);
    let fx = Fixture {
        request: req.clone(),
        response: response.to_string(),
    };
    let text = serde_json::to_string_pretty(&fx).expect("fixture serializes");
    fs::write(&path, text + "\n").map_err(io)?;
    Ok(path)
}

/// Wraps another client and writes every successful exchange to `dir`.
pub struct RecordingClient<C> {
    inner: C,
    dir: PathBuf,
}

impl<C: CompletionClient> RecordingClient<C> {
    pub fn new(inner: C, dir: impl Into<PathBuf>) -> Self {
        RecordingClient { inner, dir: dir.into() }
    }
}

impl<C: CompletionClient> CompletionClient for RecordingClient<C> {
    fn complete(&self, req: &CompletionRequest) -> Result<String, TransportError> {
        let out = self.inner.complete(req)?;
        write_fixture(&self.dir, req, &out)?;
        Ok(out)
    }
}

/// Serves responses from fixture files without touching the network.
pub struct ReplayClient {
    dir: PathBuf,
}

impl ReplayClient {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ReplayClient { dir: dir.into() }
    }
}

impl CompletionClient for ReplayClient {
    fn complete(&self, req: &CompletionRequest) -> Result<String, TransportError> {
        let path = fixture_path(&self.dir, req);
        let text = fs::read_to_string(&path).map_err(|_| TransportError::MissingFixture {
            key: req.fixture_key(),
            dir: self.dir.display().to_string(),
        })?;
        let fx: Fixture =
            serde_json::from_str(&text).map_err(|e| TransportError::Fixture(format!("{}: {e}", path.display())))?;
        if &fx.request != req {
            return Err(TransportError::Fixture(format!(
                "{} was recorded for a different request",
                path.display()
            )));
        }
        Ok(fx.response)
    }
}

/// Answers every request with a fixed string. Handy for dry runs.
pub struct StaticClient(pub String);

impl CompletionClient for StaticClient {
    fn complete(&self, _req: &CompletionRequest) -> Result<String, TransportError> {
        Ok(self.0.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_shapes() {
        assert_eq!(parse_envelope(r#"{"choices":[{"text":"hi"}]}"#).unwrap(), "hi");
        assert_eq!(
            parse_envelope(r#"{"choices":[{"message":{"role":"assistant","content":"yo"}}]}"#).unwrap(),
            "yo"
        );
        assert!(matches!(
            parse_envelope(r#"{"choices":[]}"#),
            Err(TransportError::Envelope(_))
        ));
        assert!(parse_envelope("not json").is_err());
    }

    #[test]
    fn request_defaults_and_validation() {
        let r = CompletionRequest::new("m", "p");
        assert_eq!((r.max_tokens, r.temperature), (2048, 0.0));
        assert!(CompletionRequest {
            max_tokens: 0,
            ..r.clone()
        }
        .validate()
        .is_err());
        assert!(CompletionRequest { temperature: -0.5, ..r }.validate().is_err());
    }

    #[test]
    fn fixture_key_is_stable_and_sensitive() {
        let a = CompletionRequest::new("m", "p");
        assert_eq!(a.fixture_key(), a.clone().fixture_key());
        assert_ne!(a.fixture_key(), CompletionRequest::new("m", "q").fixture_key());
        assert_eq!(a.fixture_key().len(), 64);
    }

    #[test]
    fn url_join() {
        let cfg = HttpConfig {
            endpoint: "http://h:1/".into(),
            ..HttpConfig::default()
        };
        assert_eq!(cfg.url(), "http://h:1/v1/completions");
    }

    #[test]
    fn unconfigured() {
        assert!(matches!(
            HttpClient::new(HttpConfig::default()),
            Err(TransportError::NotConfigured)
        ));
    }
}
