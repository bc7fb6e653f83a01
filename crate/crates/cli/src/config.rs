//! `key = value` run configuration with `${VAR}` environment interpolation.
//!
//! ```text
//! # comments start with '#'
//! corpus.specs = corpus/specs
//! output_dir   = runs
//! provider.gpt.kind     = openai
//! provider.gpt.endpoint = https://api.openai.com/v1
//! provider.gpt.model    = gpt-4.1
//! provider.gpt.auth     = COMPCQ_APIKEY_GPT
//! judge.provider = gpt
//! embedding.kind = file
//! embedding.dir  = corpus/vectors
//! ```
//!
//! Relative paths resolve against the directory holding the config file.
//! `auth` names an environment variable; the key itself never appears here.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use compcq_core::corpus::DecodingParams;
use compcq_core::llm::{default_auth_var, ProviderConfig, WireFormat};
use compcq_core::setmetrics::{DEFAULT_K, DEFAULT_TAU};

use crate::UsageError;

#[derive(Debug, Clone)]
pub enum ProviderKind {
    Http(ProviderConfig),
    /// Replays a canned response file; used for offline runs and tests.
    Stub { response_file: PathBuf, model: String },
}

#[derive(Debug, Clone)]
pub struct Provider {
    pub id: String,
    pub kind: ProviderKind,
}

impl Provider {
    pub fn model_name(&self) -> &str {
        match &self.kind {
            ProviderKind::Http(c) => &c.model_name,
            ProviderKind::Stub { model, .. } => model,
        }
    }

    pub fn decoding(&self) -> DecodingParams {
        match &self.kind {
            ProviderKind::Http(c) => c.decoding,
            ProviderKind::Stub { .. } => DecodingParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EmbeddingConfig {
    File { dir: PathBuf },
    Http { endpoint: String, batch_size: usize },
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub specs_dir: PathBuf,
    pub sets_dir: PathBuf,
    pub output_dir: PathBuf,
    pub cache_dir: PathBuf,
    pub providers: BTreeMap<String, Provider>,
    pub judge: Option<String>,
    pub judge_max_in_flight: usize,
    pub embedding: EmbeddingConfig,
    pub tau: f64,
    pub k: usize,
    pub seed: u64,
}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Replaces `${NAME}` with the environment value; unset variables are an error.
pub fn interpolate(value: &str, lookup: impl Fn(&str) -> Option<String>) -> anyhow::Result<String> {
    let mut out = String::new();
    let mut rest = value;
    while let Some(start) = rest.find("${") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        let end = after
            .find('}')
            .ok_or_else(|| invalid(format!("unterminated ${{ in {value:?}")))?;
        let name = &after[..end];
        let v = lookup(name).ok_or_else(|| invalid(format!("environment variable {name} is not set")))?;
        out.push_str(&v);
        rest = &after[end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

pub fn parse_pairs(text: &str) -> anyhow::Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| invalid(format!("config line {}: expected key = value", i + 1)))?;
        let v = interpolate(v.trim(), |n| std::env::var(n).ok())
            .map_err(|e| invalid(format!("config line {}: {e}", i + 1)))?;
        if map.insert(k.trim().to_owned(), v).is_some() {
            return Err(invalid(format!("config line {}: duplicate key {}", i + 1, k.trim())));
        }
    }
    Ok(map)
}

struct Keys {
    map: BTreeMap<String, String>,
    base: PathBuf,
}

impl Keys {
    fn str(&self, k: &str) -> Option<&str> {
        self.map.get(k).map(String::as_str)
    }

    fn path(&self, k: &str, default: &str) -> PathBuf {
        let p = PathBuf::from(self.str(k).unwrap_or(default));
        if p.is_absolute() {
            p
        } else {
            self.base.join(p)
        }
    }

    fn num<T: std::str::FromStr>(&self, k: &str) -> anyhow::Result<Option<T>> {
        self.str(k)
            .map(|v| v.parse::<T>().map_err(|_| invalid(format!("config key {k}: cannot parse {v:?}"))))
            .transpose()
    }
}

const PROVIDER_FIELDS: [&str; 11] = [
    "kind",
    "endpoint",
    "model",
    "auth",
    "response_file",
    "max_retries",
    "timeout_secs",
    "temperature",
    "top_p",
    "seed",
    "max_in_flight",
];

impl RunConfig {
    /// Configuration used when no `--config` is given: the bundled corpus
    /// layout relative to the working directory, file embeddings, no providers.
    pub fn defaults(base: &Path) -> Self {
        Self::from_pairs(BTreeMap::new(), base).expect("defaults are valid")
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_pairs(parse_pairs(&text)?, &base)
    }

    pub fn from_pairs(map: BTreeMap<String, String>, base: &Path) -> anyhow::Result<Self> {
        let keys = Keys {
            map,
            base: base.to_path_buf(),
        };
        for k in keys.map.keys() {
            let known = matches!(
                k.as_str(),
                "corpus.specs"
                    | "corpus.sets"
                    | "output_dir"
                    | "cache_dir"
                    | "judge.provider"
                    | "judge.max_in_flight"
                    | "embedding.kind"
                    | "embedding.endpoint"
                    | "embedding.dir"
                    | "embedding.batch_size"
                    | "tau"
                    | "k"
                    | "seed"
            ) || k
                .strip_prefix("provider.")
                .and_then(|r| r.rsplit_once('.'))
                .is_some_and(|(_, f)| PROVIDER_FIELDS.contains(&f));
            if !known {
                return Err(invalid(format!("unknown config key {k}")));
            }
        }

        let mut providers = BTreeMap::new();
        let ids: std::collections::BTreeSet<String> = keys
            .map
            .keys()
            .filter_map(|k| k.strip_prefix("provider.")?.rsplit_once('.').map(|(id, _)| id.to_owned()))
            .collect();
        for id in ids {
            providers.insert(id.clone(), provider(&keys, &id)?);
        }

        let embedding = match keys.str("embedding.kind").unwrap_or("file") {
            "file" => EmbeddingConfig::File {
                dir: keys.path("embedding.dir", "corpus/vectors"),
            },
            "http" => EmbeddingConfig::Http {
                endpoint: keys
                    .str("embedding.endpoint")
                    .ok_or_else(|| invalid("embedding.kind = http needs embedding.endpoint"))?
                    .to_owned(),
                batch_size: keys.num("embedding.batch_size")?.unwrap_or(64),
            },
            other => return Err(invalid(format!("embedding.kind must be file or http, got {other:?}"))),
        };

        let judge = keys.str("judge.provider").map(str::to_owned);
        if let Some(j) = &judge {
            if !providers.contains_key(j) {
                return Err(invalid(format!("judge.provider {j:?} is not a configured provider")));
            }
        }

        let cfg = Self {
            specs_dir: keys.path("corpus.specs", "corpus/specs"),
            sets_dir: keys.path("corpus.sets", "corpus/sets"),
            output_dir: keys.path("output_dir", "runs"),
            cache_dir: keys.path("cache_dir", ".compcq-cache"),
            providers,
            judge,
            judge_max_in_flight: keys.num("judge.max_in_flight")?.unwrap_or(1),
            embedding,
            tau: keys.num("tau")?.unwrap_or(DEFAULT_TAU),
            k: keys.num("k")?.unwrap_or(DEFAULT_K),
            seed: keys.num("seed")?.unwrap_or(DecodingParams::default().seed as u64),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(invalid(format!("tau must lie in (0, 1), got {}", self.tau)));
        }
        if self.k < 1 {
            return Err(invalid("k must be at least 1"));
        }
        Ok(())
    }

    pub fn provider(&self, id: &str) -> anyhow::Result<&Provider> {
        self.providers.get(id).ok_or_else(|| {
            let known: Vec<&str> = self.providers.keys().map(String::as_str).collect();
            invalid(format!("unknown provider {id:?}; configured: [{}]", known.join(", ")))
        })
    }
}

fn provider(keys: &Keys, id: &str) -> anyhow::Result<Provider> {
    let field = |f: &str| keys.str(&format!("provider.{id}.{f}"));
    let kind = field("kind").ok_or_else(|| invalid(format!("provider.{id}.kind is required")))?;
    let model = field("model").unwrap_or(id).to_owned();
    if kind == "stub" {
        let file = field("response_file").ok_or_else(|| invalid(format!("provider.{id}.response_file is required")))?;
        return Ok(Provider {
            id: id.to_owned(),
            kind: ProviderKind::Stub {
                response_file: keys.path(&format!("provider.{id}.response_file"), file),
                model,
            },
        });
    }
    let wire: WireFormat = kind
        .parse()
        .map_err(|e| invalid(format!("provider.{id}.kind: {e}")))?;
    let endpoint = field("endpoint").ok_or_else(|| invalid(format!("provider.{id}.endpoint is required")))?;
    let mut cfg = ProviderConfig::new(id, wire, endpoint, model);
    cfg.auth = match field("auth") {
        Some("none") => None,
        Some(var) => Some(var.to_owned()),
        None => Some(default_auth_var(id)),
    };
    let num = |f: &str| keys.num::<f64>(&format!("provider.{id}.{f}"));
    if let Some(v) = keys.num(&format!("provider.{id}.max_retries"))? {
        cfg.max_retries = v;
    }
    if let Some(v) = num("timeout_secs")? {
        cfg.timeout = Duration::from_secs_f64(v);
    }
    if let Some(v) = num("temperature")? {
        cfg.decoding.temperature = v;
    }
    if let Some(v) = num("top_p")? {
        cfg.decoding.top_p = v;
    }
    if let Some(v) = keys.num(&format!("provider.{id}.seed"))? {
        cfg.decoding.seed = v;
    }
    cfg.validate().map_err(|e| invalid(e.to_string()))?;
    Ok(Provider {
        id: id.to_owned(),
        kind: ProviderKind::Http(cfg),
    })
}
