//! Zero-shot CQ generation: prompt construction, list parsing and the
//! audit record written for every generated set.

use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use chrono::{DateTime, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::{write_atomic, CqSet, DecodingParams, RequirementSpec};
use crate::error::{Error, Result};
use crate::llm::LlmClient;

pub const GENERATE_PROMPT_TEMPLATE: &str = include_str!("../prompts/generate.txt");

/// Instruction + specification body. No examples, no quality criteria.
pub fn build_prompt(spec: &RequirementSpec) -> String {
    GENERATE_PROMPT_TEMPLATE.replace("{{requirements}}", spec.body.trim())
}

static LIST_MARKER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(?:(?:C?Q\s*)?\d+\s*[.):]|[-*•+‣◦])(?:\s+|$)").unwrap()
});
static BOLD_NUMBER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\*\*(?:C?Q\s*)?\d+\s*[.):]?\*\*(?:\s+|$)").unwrap());

const QUOTE_PAIRS: [(char, char); 5] = [('"', '"'), ('\'', '\''), ('“', '”'), ('‘', '’'), ('`', '`')];

fn strip_once(s: &str) -> &str {
    let s = s.trim();
    if let Some(m) = BOLD_NUMBER.find(s).or_else(|| LIST_MARKER.find(s)) {
        return &s[m.end()..];
    }
    if s.len() >= 4 && s.starts_with("**") && s.ends_with("**") {
        return &s[2..s.len() - 2];
    }
    for (open, close) in QUOTE_PAIRS {
        if s.chars().count() >= 2 && s.starts_with(open) && s.ends_with(close) {
            return &s[open.len_utf8()..s.len() - close.len_utf8()];
        }
    }
    s
}

fn strip_all(s: &str) -> &str {
    let mut cur = s.trim();
    loop {
        let next = strip_once(cur).trim();
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

/// Extracts questions from a free-form model reply.
///
/// List-marked lines (`1.`, `1)`, `Q1:`, `-`, `*`, `•`) are kept whatever
/// they end with; unmarked lines only if they end in `?`. Markers, surrounding
/// quotes and bold markup are stripped, and exact duplicates dropped.
pub fn parse_cq_list(raw: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for line in raw.lines() {
        let trimmed = line.trim();
        let marked = LIST_MARKER.is_match(trimmed) || BOLD_NUMBER.is_match(trimmed);
        let item = strip_all(trimmed);
        if item.is_empty() || !(marked || item.ends_with('?')) {
            continue;
        }
        if !out.iter().any(|o| o == item) {
            out.push(item.to_owned());
        }
    }
    out
}

/// Renders items as a bullet list that [`parse_cq_list`] reads back unchanged.
pub fn join_cq_list(items: &[String]) -> String {
    items.iter().map(|i| format!("- {i}\n")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedStatus {
    Sent,
    RequestedButUnsupported,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub set_id: String,
    pub spec_id: String,
    pub provider_id: String,
    pub model_id: String,
    pub prompt_text: String,
    pub raw_response: String,
    pub parsed_count: usize,
    pub created_at: DateTime<Utc>,
    pub decoding: DecodingParams,
    pub seed: SeedStatus,
}

pub fn record_path(dir: &Path, set_id: &str) -> PathBuf {
    dir.join(format!("{set_id}.generation.json"))
}

pub fn load_record(path: impl AsRef<Path>) -> Result<GenerationRecord> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.into(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// Everything [`generate_cqs`] needs besides the spec and the client.
#[derive(Debug, Clone)]
pub struct GenerationRequest<'a> {
    pub provider_id: &'a str,
    pub model_id: &'a str,
    pub decoding: DecodingParams,
    /// Directory receiving the generation record.
    pub record_dir: &'a Path,
}

/// Prompts `client` with the spec, parses the reply and writes the audit
/// record before returning the set. The set id is `<spec_id>.<provider_id>`.
pub fn generate_cqs(
    spec: &RequirementSpec,
    client: &dyn LlmClient,
    req: &GenerationRequest<'_>,
) -> Result<(CqSet, GenerationRecord)> {
    spec.validate()?;
    let prompt = build_prompt(spec);
    let completion = client.complete(&prompt)?;
    let items = parse_cq_list(&completion.text);
    if items.is_empty() {
        return Err(Error::EmptyGeneration(req.provider_id.to_owned()));
    }
    let set_id = format!("{}.{}", spec.spec_id, req.provider_id);
    let created_at = Utc::now();
    let set = CqSet::from_texts(
        set_id.clone(),
        spec.spec_id.clone(),
        req.model_id,
        req.decoding,
        created_at,
        items,
    )?;
    let record = GenerationRecord {
        set_id: set_id.clone(),
        spec_id: spec.spec_id.clone(),
        provider_id: req.provider_id.to_owned(),
        model_id: req.model_id.to_owned(),
        prompt_text: prompt,
        raw_response: completion.text,
        parsed_count: set.len(),
        created_at,
        decoding: req.decoding,
        seed: if completion.seed_sent {
            SeedStatus::Sent
        } else {
            SeedStatus::RequestedButUnsupported
        },
    };
    let json = serde_json::to_string_pretty(&record).expect("record serializes");
    write_atomic(&record_path(req.record_dir, &set_id), json.as_bytes())?;
    Ok((set, record))
}
