//! Provider adapters for chat-completion style LLM APIs.
//!
//! All callers speak one internal request shape: a single user message plus
//! decoding parameters. Each [`WireFormat`] maps that shape onto a provider's
//! JSON body and extracts the reply text from its response.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::corpus::DecodingParams;
use crate::error::{Error, Result};

/// Default output budget for providers that require an explicit one.
const MAX_OUTPUT_TOKENS: u32 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WireFormat {
    /// `POST {endpoint}/chat/completions` (OpenAI and compatible gateways).
    OpenAi,
    /// `POST {endpoint}/models/{model}:generateContent`.
    Gemini,
    /// `POST {endpoint}/api/chat` (local Ollama or Ollama cloud).
    Ollama,
    /// `POST {endpoint}/v1/messages`.
    Anthropic,
}

impl WireFormat {
    pub fn accepts_seed(self) -> bool {
        !matches!(self, WireFormat::Anthropic)
    }
}

impl FromStr for WireFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "openai" | "open_ai" => Ok(WireFormat::OpenAi),
            "gemini" => Ok(WireFormat::Gemini),
            "ollama" => Ok(WireFormat::Ollama),
            "anthropic" => Ok(WireFormat::Anthropic),
            other => Err(Error::Validation(format!("unknown wire format {other:?}"))),
        }
    }
}

impl fmt::Display for WireFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WireFormat::OpenAi => "openai",
            WireFormat::Gemini => "gemini",
            WireFormat::Ollama => "ollama",
            WireFormat::Anthropic => "anthropic",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProviderConfig {
    pub provider_id: String,
    pub wire: WireFormat,
    /// Base URL; the wire format appends its own path.
    pub endpoint: String,
    pub model_name: String,
    /// Name of the environment variable holding the API key, if any.
    pub auth: Option<String>,
    pub decoding: DecodingParams,
    pub max_retries: u32,
    pub timeout: Duration,
    /// First retry delay; doubles on every further attempt.
    pub backoff: Duration,
}

/// `COMPCQ_APIKEY_<PROVIDER_ID>` with the id upper-cased and non-alphanumerics replaced.
pub fn default_auth_var(provider_id: &str) -> String {
    let suffix: String = provider_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_uppercase()
            } else {
                '_'
            }
        })
        .collect();
    format!("COMPCQ_APIKEY_{suffix}")
}

fn is_env_var_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c == '_' || c.is_ascii_uppercase())
        && chars.all(|c| c == '_' || c.is_ascii_uppercase() || c.is_ascii_digit())
}

impl ProviderConfig {
    pub fn new(
        provider_id: impl Into<String>,
        wire: WireFormat,
        endpoint: impl Into<String>,
        model_name: impl Into<String>,
    ) -> Self {
        let provider_id = provider_id.into();
        Self {
            auth: Some(default_auth_var(&provider_id)),
            provider_id,
            wire,
            endpoint: endpoint.into(),
            model_name: model_name.into(),
            decoding: DecodingParams::default(),
            max_retries: 3,
            timeout: Duration::from_secs(120),
            backoff: Duration::from_millis(500),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.provider_id.trim().is_empty() {
            return Err(Error::Validation("provider_id is empty".into()));
        }
        let url = reqwest::Url::parse(&self.endpoint).map_err(|e| {
            Error::Validation(format!(
                "provider {}: endpoint {:?} is not a URL: {e}",
                self.provider_id, self.endpoint
            ))
        })?;
        if !matches!(url.scheme(), "http" | "https") {
            return Err(Error::Validation(format!(
                "provider {}: endpoint must be http(s)",
                self.provider_id
            )));
        }
        if let Some(var) = &self.auth {
            if !is_env_var_name(var) {
                return Err(Error::Validation(format!(
                    "provider {}: auth must name an environment variable, got {var:?}",
                    self.provider_id
                )));
            }
        }
        self.decoding.validate()
    }

    /// `provider_id/model_name`, used as the judge id and cache namespace.
    pub fn client_id(&self) -> String {
        format!("{}/{}", self.provider_id, self.model_name)
    }
}

/// What a client returned for one prompt.
#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    /// Whether the decoding seed was actually transmitted.
    pub seed_sent: bool,
}

/// A model that answers single-message prompts.
pub trait LlmClient: Send + Sync {
    fn id(&self) -> &str;
    fn complete(&self, prompt: &str) -> Result<Completion>;
}

/// A fully built HTTP request body, before credentials are attached.
#[derive(Debug, Clone, PartialEq)]
pub struct WireRequest {
    pub url: String,
    pub body: Value,
    pub seed_sent: bool,
}

pub fn build_request(cfg: &ProviderConfig, prompt: &str) -> WireRequest {
    let base = cfg.endpoint.trim_end_matches('/');
    let d = cfg.decoding;
    let seed_sent = cfg.wire.accepts_seed();
    let (url, body) = match cfg.wire {
        WireFormat::OpenAi => (
            format!("{base}/chat/completions"),
            json!({
                "model": cfg.model_name,
                "messages": [{"role": "user", "content": prompt}],
                "temperature": d.temperature,
                "top_p": d.top_p,
                "seed": d.seed,
            }),
        ),
        WireFormat::Gemini => (
            format!("{base}/models/{}:generateContent", cfg.model_name),
            json!({
                "contents": [{"role": "user", "parts": [{"text": prompt}]}],
                "generationConfig": {
                    "temperature": d.temperature,
                    "topP": d.top_p,
                    "seed": d.seed,
                },
            }),
        ),
        WireFormat::Ollama => (
            format!("{base}/api/chat"),
            json!({
                "model": cfg.model_name,
                "messages": [{"role": "user", "content": prompt}],
                "stream": false,
                "options": {
                    "temperature": d.temperature,
                    "top_p": d.top_p,
                    "seed": d.seed,
                },
            }),
        ),
        WireFormat::Anthropic => (
            format!("{base}/v1/messages"),
            json!({
                "model": cfg.model_name,
                "max_tokens": MAX_OUTPUT_TOKENS,
                "messages": [{"role": "user", "content": prompt}],
                "temperature": d.temperature,
                "top_p": d.top_p,
            }),
        ),
    };
    WireRequest {
        url,
        body,
        seed_sent,
    }
}

/// Extracts the reply text from a provider response body.
pub fn parse_response(wire: WireFormat, body: &Value) -> std::result::Result<String, String> {
    let text = match wire {
        WireFormat::OpenAi => body
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_owned),
        WireFormat::Gemini => body
            .pointer("/candidates/0/content/parts")
            .and_then(Value::as_array)
            .map(|parts| {
                parts
                    .iter()
                    .filter_map(|p| p.get("text").and_then(Value::as_str))
                    .collect::<String>()
            }),
        WireFormat::Ollama => body
            .pointer("/message/content")
            .and_then(Value::as_str)
            .map(str::to_owned),
        WireFormat::Anthropic => body.get("content").and_then(Value::as_array).map(|blocks| {
            blocks
                .iter()
                .filter(|b| b.get("type").and_then(Value::as_str) == Some("text"))
                .filter_map(|b| b.get("text").and_then(Value::as_str))
                .collect::<String>()
        }),
    };
    text.ok_or_else(|| format!("unexpected {wire} response shape"))
}

/// Blocking HTTP client for one configured provider.
pub struct HttpClient {
    cfg: ProviderConfig,
    id: String,
    api_key: Option<String>,
    http: reqwest::blocking::Client,
}

impl fmt::Debug for HttpClient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HttpClient")
            .field("id", &self.id)
            .field("endpoint", &self.cfg.endpoint)
            .finish_non_exhaustive()
    }
}

impl HttpClient {
    /// Resolves the API key from the environment and builds the client.
    pub fn from_config(cfg: ProviderConfig) -> Result<Self> {
        cfg.validate()?;
        let api_key = match &cfg.auth {
            None => None,
            Some(var) => match std::env::var(var) {
                Ok(v) if !v.is_empty() => Some(v),
                _ => {
                    return Err(Error::MissingCredential {
                        provider_id: cfg.provider_id.clone(),
                        var: var.clone(),
                    })
                }
            },
        };
        let http = reqwest::blocking::Client::builder()
            .timeout(cfg.timeout)
            .build()
            .map_err(|e| Error::Provider {
                provider_id: cfg.provider_id.clone(),
                status: None,
                message: format!("cannot build HTTP client: {e}"),
            })?;
        Ok(Self {
            id: cfg.client_id(),
            cfg,
            api_key,
            http,
        })
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.cfg
    }

    fn send_once(&self, req: &WireRequest) -> std::result::Result<Value, Attempt> {
        let mut builder = self.http.post(&req.url).json(&req.body);
        if let Some(key) = &self.api_key {
            builder = match self.cfg.wire {
                WireFormat::OpenAi | WireFormat::Ollama => builder.bearer_auth(key),
                WireFormat::Gemini => builder.header("x-goog-api-key", key),
                WireFormat::Anthropic => builder
                    .header("x-api-key", key)
                    .header("anthropic-version", "2023-06-01"),
            };
        }
        let resp = builder
            .send()
            .map_err(|e| Attempt::Retry(None, format!("transport: {e}")))?;
        let status = resp.status();
        let body = resp
            .text()
            .map_err(|e| Attempt::Retry(Some(status.as_u16()), format!("reading body: {e}")))?;
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(Attempt::Retry(Some(status.as_u16()), truncate(&body)));
        }
        if !status.is_success() {
            return Err(Attempt::Fatal(Some(status.as_u16()), truncate(&body)));
        }
        serde_json::from_str(&body)
            .map_err(|e| Attempt::Fatal(Some(status.as_u16()), format!("invalid JSON: {e}")))
    }
}

enum Attempt {
    Retry(Option<u16>, String),
    Fatal(Option<u16>, String),
}

fn truncate(s: &str) -> String {
    const MAX: usize = 300;
    match s.char_indices().nth(MAX) {
        Some((i, _)) => format!("{}...", &s[..i]),
        None => s.to_owned(),
    }
}

impl LlmClient for HttpClient {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, prompt: &str) -> Result<Completion> {
        let req = build_request(&self.cfg, prompt);
        let mut last = (None, String::new());
        for attempt in 0..=self.cfg.max_retries {
            if attempt > 0 {
                let delay = self.cfg.backoff.saturating_mul(1 << (attempt - 1).min(16));
                std::thread::sleep(delay);
            }
            match self.send_once(&req) {
                Ok(body) => {
                    let text = parse_response(self.cfg.wire, &body).map_err(|message| {
                        Error::Provider {
                            provider_id: self.cfg.provider_id.clone(),
                            status: None,
                            message,
                        }
                    })?;
                    return Ok(Completion {
                        text,
                        seed_sent: req.seed_sent,
                    });
                }
                Err(Attempt::Fatal(status, message)) => {
                    return Err(Error::Provider {
                        provider_id: self.cfg.provider_id.clone(),
                        status,
                        message,
                    })
                }
                Err(Attempt::Retry(status, message)) => {
                    log::warn!(
                        "provider {} attempt {} failed: {}",
                        self.cfg.provider_id,
                        attempt + 1,
                        message
                    );
                    last = (status, message);
                }
            }
        }
        Err(Error::Provider {
            provider_id: self.cfg.provider_id.clone(),
            status: last.0,
            message: format!(
                "giving up after {} attempts: {}",
                self.cfg.max_retries + 1,
                last.1
            ),
        })
    }
}

/// Scripted client for tests and offline runs: replays responses in order,
/// repeating the last one once the script is exhausted.
pub struct StubClient {
    id: String,
    script: Mutex<VecDeque<String>>,
    last: Mutex<Option<String>>,
    calls: AtomicUsize,
}

impl StubClient {
    pub fn new(id: impl Into<String>, responses: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            id: id.into(),
            script: Mutex::new(responses.into_iter().map(Into::into).collect()),
            last: Mutex::new(None),
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl LlmClient for StubClient {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, _prompt: &str) -> Result<Completion> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let next = self.script.lock().expect("stub lock").pop_front();
        let mut last = self.last.lock().expect("stub lock");
        let text = match next {
            Some(t) => {
                *last = Some(t.clone());
                t
            }
            None => last.clone().ok_or_else(|| Error::Provider {
                provider_id: self.id.clone(),
                status: None,
                message: "stub has no scripted responses".into(),
            })?,
        };
        Ok(Completion {
            text,
            seed_sent: false,
        })
    }
}
