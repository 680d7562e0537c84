//! Minimal chat-completions client used to produce completion files.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use log::warn;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::HarnessError;

pub const DEFAULT_API_KEY_ENV: &str = "CHEMCENSOR_API_KEY";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EndpointConfig {
    /// Base URL; `/chat/completions` is appended.
    pub base_url: String,
    pub model: String,
    /// Environment variable holding the bearer token; unset means no auth header.
    pub api_key_env: String,
    pub temperature: Option<f64>,
    pub max_tokens: Option<u32>,
    pub timeout: Duration,
    pub max_retries: u32,
    pub backoff: Duration,
    pub concurrency: usize,
}

impl EndpointConfig {
    pub fn new(base_url: &str, model: &str) -> EndpointConfig {
        EndpointConfig {
            base_url: base_url.trim_end_matches('/').to_string(),
            model: model.to_string(),
            api_key_env: DEFAULT_API_KEY_ENV.to_string(),
            temperature: None,
            max_tokens: None,
            timeout: Duration::from_secs(120),
            max_retries: 3,
            backoff: Duration::from_millis(500),
            concurrency: 4,
        }
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.base_url)
    }
}

/// One requested completion: its text, or the error that exhausted retries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SampleResult {
    Text(String),
    Failed(String),
}

impl SampleResult {
    pub fn text(&self) -> Option<&str> {
        match self {
            SampleResult::Text(t) => Some(t),
            SampleResult::Failed(_) => None,
        }
    }
}

enum Attempt {
    Done(String),
    Retry(String),
    Fatal(String),
    Auth(String),
}

fn attempt(agent: &ureq::Agent, cfg: &EndpointConfig, key: Option<&str>, body: &Value) -> Attempt {
    let mut req = agent.post(cfg.url()).header("Content-Type", "application/json");
    if let Some(k) = key {
        req = req.header("Authorization", format!("Bearer {k}"));
    }
    let mut resp = match req.send_json(body) {
        Ok(r) => r,
        Err(e) => return Attempt::Retry(format!("request failed: {e}")),
    };
    let status = resp.status().as_u16();
    if status == 401 || status == 403 {
        return Attempt::Auth(format!("endpoint rejected credentials (HTTP {status})"));
    }
    if status == 429 || status >= 500 {
        return Attempt::Retry(format!("HTTP {status}"));
    }
    if !(200..300).contains(&status) {
        return Attempt::Fatal(format!("HTTP {status}"));
    }
    let value: Value = match resp.body_mut().read_json() {
        Ok(v) => v,
        Err(e) => return Attempt::Retry(format!("unreadable response body: {e}")),
    };
    match value.pointer("/choices/0/message/content").and_then(Value::as_str) {
        Some(text) => Attempt::Done(text.to_string()),
        None => Attempt::Fatal("response has no choices[0].message.content".into()),
    }
}

/// Requests `n` independent completions of `prompt`.
///
/// Transient failures (transport errors, 429, 5xx) are retried with
/// exponential backoff; a sample whose retries run out becomes
/// [`SampleResult::Failed`]. Rejected credentials abort the whole call.
pub fn query_model(cfg: &EndpointConfig, prompt: &str, n: usize) -> Result<Vec<SampleResult>, HarnessError> {
    let key = std::env::var(&cfg.api_key_env).ok().filter(|k| !k.is_empty());
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(cfg.timeout))
        .http_status_as_error(false)
        .build()
        .into();
    let mut body = json!({
        "model": cfg.model,
        "messages": [{"role": "user", "content": prompt}],
    });
    if let Some(t) = cfg.temperature {
        body["temperature"] = json!(t);
    }
    if let Some(m) = cfg.max_tokens {
        body["max_tokens"] = json!(m);
    }
    let results: Mutex<Vec<Option<SampleResult>>> = Mutex::new(vec![None; n]);
    let next = AtomicUsize::new(0);
    let auth_failed = AtomicBool::new(false);
    let auth_message: Mutex<Option<String>> = Mutex::new(None);
    let workers = cfg.concurrency.clamp(1, n.max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= n || auth_failed.load(Ordering::SeqCst) {
                    break;
                }
                let mut tries = 0;
                let outcome = loop {
                    match attempt(&agent, cfg, key.as_deref(), &body) {
                        Attempt::Done(text) => break SampleResult::Text(text),
                        Attempt::Fatal(msg) => break SampleResult::Failed(msg),
                        Attempt::Auth(msg) => {
                            auth_failed.store(true, Ordering::SeqCst);
                            *auth_message.lock().expect("lock") = Some(msg.clone());
                            break SampleResult::Failed(msg);
                        }
                        Attempt::Retry(msg) => {
                            if tries >= cfg.max_retries {
                                warn!("sample {i}: giving up after {} attempts: {msg}", tries + 1);
                                break SampleResult::Failed(msg);
                            }
                            std::thread::sleep(cfg.backoff * 2u32.saturating_pow(tries));
                            tries += 1;
                        }
                    }
                };
                results.lock().expect("lock")[i] = Some(outcome);
            });
        }
    });
    if let Some(msg) = auth_message.into_inner().expect("lock") {
        return Err(HarnessError::Auth(msg));
    }
    Ok(results
        .into_inner()
        .expect("lock")
        .into_iter()
        .map(|r| r.unwrap_or_else(|| SampleResult::Failed("not attempted".into())))
        .collect())
}
