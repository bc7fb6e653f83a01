//! Data model and line-delimited persistence for requirement specs and CQ sets.
//!
//! A CQ set file holds one JSON record per question. Set-level fields
//! (`set_id`, `spec_id`, `model_id`, `decoding`, `created_at`) are repeated on
//! every line so that each line is self-describing and files stay diffable.

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecKind {
    UserStory,
    UseCase,
}

/// A requirement specification a CQ set is generated from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementSpec {
    pub spec_id: String,
    pub kind: SpecKind,
    pub domain: String,
    pub title: String,
    pub body: String,
}

impl RequirementSpec {
    pub fn validate(&self) -> Result<()> {
        if self.spec_id.trim().is_empty() {
            return Err(Error::Validation("spec_id is empty".into()));
        }
        if self.body.trim().is_empty() {
            return Err(Error::Validation(format!(
                "spec {:?} has an empty body",
                self.spec_id
            )));
        }
        Ok(())
    }
}

/// Decoding parameters sent to the generating model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodingParams {
    pub temperature: f64,
    pub top_p: f64,
    pub seed: i64,
}

impl Default for DecodingParams {
    fn default() -> Self {
        Self {
            temperature: 0.0,
            top_p: 1.0,
            seed: 46,
        }
    }
}

impl DecodingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::Validation(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(Error::Validation(format!(
                "top_p must be in (0, 1], got {}",
                self.top_p
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompetencyQuestion {
    pub cq_id: String,
    pub text: String,
    pub set_id: String,
}

/// An ordered set of CQs produced by one model from one spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CqSet {
    pub set_id: String,
    pub spec_id: String,
    pub model_id: String,
    pub decoding: DecodingParams,
    pub created_at: DateTime<Utc>,
    pub cqs: Vec<CompetencyQuestion>,
}

/// Deterministic id for the `index`-th (0-based) question of a set.
pub fn default_cq_id(set_id: &str, index: usize) -> String {
    format!("{set_id}-{:03}", index + 1)
}

impl CqSet {
    /// Builds a set from plain question strings, assigning `<set_id>-NNN` ids.
    pub fn from_texts(
        set_id: impl Into<String>,
        spec_id: impl Into<String>,
        model_id: impl Into<String>,
        decoding: DecodingParams,
        created_at: DateTime<Utc>,
        texts: impl IntoIterator<Item = String>,
    ) -> Result<Self> {
        let set_id = set_id.into();
        let cqs = texts
            .into_iter()
            .enumerate()
            .map(|(i, text)| CompetencyQuestion {
                cq_id: default_cq_id(&set_id, i),
                text,
                set_id: set_id.clone(),
            })
            .collect();
        let set = Self {
            set_id,
            spec_id: spec_id.into(),
            model_id: model_id.into(),
            decoding,
            created_at,
            cqs,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if self.set_id.trim().is_empty() {
            return Err(Error::Validation("set_id is empty".into()));
        }
        if self.cqs.is_empty() {
            return Err(Error::Validation(format!(
                "set {:?} has no questions",
                self.set_id
            )));
        }
        self.decoding.validate()?;
        let mut seen = HashSet::new();
        for cq in &self.cqs {
            if cq.text.trim().is_empty() {
                return Err(Error::Validation(format!(
                    "question {:?} has empty text",
                    cq.cq_id
                )));
            }
            if cq.set_id != self.set_id {
                return Err(Error::Validation(format!(
                    "question {:?} references set {:?}, expected {:?}",
                    cq.cq_id, cq.set_id, self.set_id
                )));
            }
            if !seen.insert(cq.cq_id.as_str()) {
                return Err(Error::DuplicateId(cq.cq_id.clone()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.cqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cqs.is_empty()
    }

    pub fn get(&self, cq_id: &str) -> Option<&CompetencyQuestion> {
        self.cqs.iter().find(|cq| cq.cq_id == cq_id)
    }
}

/// On-disk line shape. Field order here is the serialization order.
#[derive(Debug, Serialize, Deserialize)]
struct CqRecord {
    #[serde(default)]
    cq_id: Option<String>,
    text: String,
    set_id: String,
    spec_id: String,
    model_id: String,
    #[serde(default)]
    decoding: DecodingParams,
    created_at: DateTime<Utc>,
}

pub fn load_cqset(path: impl AsRef<Path>) -> Result<CqSet> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut set: Option<CqSet> = None;
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CqRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message: e.to_string(),
        })?;
        let set = set.get_or_insert_with(|| CqSet {
            set_id: rec.set_id.clone(),
            spec_id: rec.spec_id.clone(),
            model_id: rec.model_id.clone(),
            decoding: rec.decoding,
            created_at: rec.created_at,
            cqs: Vec::new(),
        });
        if rec.set_id != set.set_id
            || rec.spec_id != set.spec_id
            || rec.model_id != set.model_id
            || rec.decoding != set.decoding
            || rec.created_at != set.created_at
        {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: "set-level fields differ from the first record".into(),
            });
        }
        let cq_id = rec
            .cq_id
            .unwrap_or_else(|| default_cq_id(&set.set_id, set.cqs.len()));
        set.cqs.push(CompetencyQuestion {
            cq_id,
            text: rec.text,
            set_id: rec.set_id,
        });
    }
    let set = set.ok_or_else(|| {
        Error::Validation(format!("{}: file contains no records", path.display()))
    })?;
    set.validate()?;
    Ok(set)
}

pub fn save_cqset(set: &CqSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    set.validate()?;
    let mut out = String::new();
    for cq in &set.cqs {
        let rec = CqRecord {
            cq_id: Some(cq.cq_id.clone()),
            text: cq.text.clone(),
            set_id: set.set_id.clone(),
            spec_id: set.spec_id.clone(),
            model_id: set.model_id.clone(),
            decoding: set.decoding,
            created_at: set.created_at,
        };
        out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

pub fn load_spec(path: impl AsRef<Path>) -> Result<RequirementSpec> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let spec: RequirementSpec = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    spec.validate()?;
    Ok(spec)
}

pub fn save_spec(spec: &RequirementSpec, path: impl AsRef<Path>) -> Result<()> {
    spec.validate()?;
    let mut text = serde_json::to_string_pretty(spec).expect("spec serializes");
    text.push('\n');
    write_atomic(path.as_ref(), text.as_bytes())
}

/// Loads every `*.json` spec in `dir`, sorted by spec id.
pub fn load_corpus(dir: impl AsRef<Path>) -> Result<Vec<RequirementSpec>> {
    let dir = dir.as_ref();
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    paths.sort();
    let mut specs = Vec::with_capacity(paths.len());
    let mut seen = HashSet::new();
    for p in paths {
        let spec = load_spec(&p)?;
        if !seen.insert(spec.spec_id.clone()) {
            return Err(Error::DuplicateId(spec.spec_id));
        }
        specs.push(spec);
    }
    specs.sort_by(|a, b| a.spec_id.cmp(&b.spec_id));
    Ok(specs)
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{file_name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use proptest::prelude::*;

    fn ts() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2025, 6, 1, 12, 0, 0).unwrap()
    }

    fn sample(texts: &[&str]) -> CqSet {
        CqSet::from_texts(
            "wtgw.stub",
            "wtgw",
            "stub",
            DecodingParams::default(),
            ts(),
            texts.iter().map(|s| s.to_string()),
        )
        .unwrap()
    }

    #[test]
    fn decoding_defaults() {
        let d = DecodingParams::default();
        assert_eq!((d.temperature, d.top_p, d.seed), (0.0, 1.0, 46));
    }

    #[test]
    fn three_line_file_keeps_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.jsonl");
        let set = sample(&["Which park?", "When to go?", "Who visits?"]);
        save_cqset(&set, &path).unwrap();
        let back = load_cqset(&path).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back.cqs[0].text, "Which park?");
        assert_eq!(back.cqs[2].cq_id, "wtgw.stub-003");
        assert_eq!(back, set);
    }

    #[test]
    fn duplicate_id_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dup.jsonl");
        let line = |id: &str| {
            format!(
                r#"{{"cq_id":"{id}","text":"What?","set_id":"s","spec_id":"x","model_id":"m","decoding":{{"temperature":0,"top_p":1,"seed":46}},"created_at":"2025-01-01T00:00:00Z"}}"#
            )
        };
        fs::write(&path, format!("{}\n{}\n", line("q1"), line("q1"))).unwrap();
        match load_cqset(&path) {
            Err(Error::DuplicateId(id)) => assert_eq!(id, "q1"),
            other => panic!("expected duplicate id error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        let good = r#"{"text":"What?","set_id":"s","spec_id":"x","model_id":"m","created_at":"2025-01-01T00:00:00Z"}"#;
        fs::write(&path, format!("{good}\n{{not json\n")).unwrap();
        match load_cqset(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_ids_are_generated() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("noid.jsonl");
        let rec = |t: &str| {
            format!(
                r#"{{"text":"{t}","set_id":"bme.x","spec_id":"bme","model_id":"m","created_at":"2025-01-01T00:00:00Z"}}"#
            )
        };
        fs::write(&path, format!("{}\n{}\n", rec("A?"), rec("B?"))).unwrap();
        let set = load_cqset(&path).unwrap();
        assert_eq!(set.cqs[0].cq_id, "bme.x-001");
        assert_eq!(set.cqs[1].cq_id, "bme.x-002");
        assert_eq!(set.decoding, DecodingParams::default());
    }

    #[test]
    fn empty_set_is_rejected_before_write() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.jsonl");
        let mut set = sample(&["What?"]);
        set.cqs.clear();
        assert!(matches!(save_cqset(&set, &path), Err(Error::Validation(_))));
        assert!(!path.exists());
    }

    #[test]
    fn io_error_carries_path() {
        let set = sample(&["What?"]);
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = save_cqset(&set, blocker.join("sub/out.jsonl")).unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }

    #[test]
    fn blank_question_is_invalid() {
        let mut set = sample(&["What?"]);
        set.cqs[0].text = "   ".into();
        assert!(set.validate().is_err());
    }

    proptest! {
        #[test]
        fn unicode_text_round_trips(texts in prop::collection::vec("\\PC{1,40}", 1..8)) {
            prop_assume!(texts.iter().all(|t| !t.trim().is_empty()));
            let set = sample(&texts.iter().map(String::as_str).collect::<Vec<_>>());
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("u.jsonl");
            save_cqset(&set, &path).unwrap();
            prop_assert_eq!(load_cqset(&path).unwrap(), set);
        }
    }
}
