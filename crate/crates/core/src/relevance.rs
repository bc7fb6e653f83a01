//! Four-point relevance ratings of CQs against their source specification.

use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::complexity::fill_template;
use crate::corpus::{CompetencyQuestion, RequirementSpec};
use crate::error::{Error, Result};
use crate::judge::{map_bounded, Judge};

pub const RELEVANCE_PROMPT_TEMPLATE: &str = include_str!("../prompts/relevance.txt");

static STANDALONE_INT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?:^|[^0-9A-Za-z.])(-?[0-9]+)(?:$|[^0-9A-Za-z.]|\.(?:$|[^0-9]))").unwrap());

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelevanceRating {
    pub cq_id: String,
    pub score: u8,
    pub judge_id: String,
    pub rationale: String,
}

pub fn relevance_prompt(cq: &CompetencyQuestion, spec: &RequirementSpec) -> String {
    fill_template(RELEVANCE_PROMPT_TEMPLATE, spec, &cq.text)
}

/// First standalone integer of the reply, accepted only if it is 1 to 4.
/// Returns the score and the remaining text as rationale.
pub fn parse_score(reply: &str) -> std::result::Result<(u8, String), String> {
    let caps = STANDALONE_INT
        .captures(reply)
        .ok_or_else(|| format!("no integer score in reply {:?}", truncate(reply)))?;
    let m = caps.get(1).expect("group 1");
    let score: i64 = m
        .as_str()
        .parse()
        .map_err(|_| format!("unparseable score {:?}", m.as_str()))?;
    if !(1..=4).contains(&score) {
        return Err(format!("score {score} outside 1..=4"));
    }
    let rationale = reply[m.end()..]
        .trim_start_matches(|c: char| c.is_whitespace() || ".:-)]*".contains(c))
        .trim()
        .to_owned();
    Ok((score as u8, rationale))
}

fn truncate(s: &str) -> String {
    s.chars().take(60).collect()
}

/// Rates one CQ. A reply without a valid score is retried once with a
/// stricter suffix before the CQ is flagged.
pub fn judge_relevance(
    cq: &CompetencyQuestion,
    spec: &RequirementSpec,
    judge: &Judge,
) -> Result<RelevanceRating> {
    let prompt = relevance_prompt(cq, spec);
    let rating = |(score, rationale): (u8, String)| RelevanceRating {
        cq_id: cq.cq_id.clone(),
        score,
        judge_id: judge.id().to_owned(),
        rationale,
    };
    let first_err = match parse_score(&judge.ask(&prompt, &cq.text)?) {
        Ok(p) => return Ok(rating(p)),
        Err(e) => e,
    };
    let retry = format!("{prompt}\n\nStart your reply with exactly one digit: 1, 2, 3 or 4.");
    parse_score(&judge.ask(&retry, &cq.text)?)
        .map(rating)
        .map_err(|e| Error::Judgment {
            cq_id: cq.cq_id.clone(),
            message: format!("{first_err}; after retry: {e}"),
        })
}

pub fn judge_batch(
    cqs: &[CompetencyQuestion],
    spec: &RequirementSpec,
    judge: &Judge,
) -> Vec<Result<RelevanceRating>> {
    map_bounded(cqs, judge.max_in_flight(), |cq| judge_relevance(cq, spec, judge))
}

/// One line of a judge validation fixture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationItem {
    pub cq_id: String,
    pub text: String,
    pub spec_id: String,
    pub expected: u8,
}

pub fn load_validation_fixture(path: impl AsRef<Path>) -> Result<Vec<ValidationItem>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item: ValidationItem = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: path.into(),
            line: i + 1,
            message: e.to_string(),
        })?;
        if !(1..=4).contains(&item.expected) {
            return Err(Error::Parse {
                path: path.into(),
                line: i + 1,
                message: format!("expected score {} outside 1..=4", item.expected),
            });
        }
        out.push(item);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementRow {
    pub cq_id: String,
    pub expected: u8,
    /// Absent when the judge failed on this item.
    pub actual: Option<u8>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub judge_id: String,
    pub rows: Vec<AgreementRow>,
    /// Fractions over all rows; failed items count as disagreement.
    pub exact_match: f64,
    pub off_by_one: f64,
}

/// Compares judge ratings with expected scores. Per-item failures are
/// recorded in the report rather than aborting the batch.
pub fn validate_judge(
    fixture: &[(CompetencyQuestion, RequirementSpec, u8)],
    judge: &Judge,
) -> Result<AgreementReport> {
    if fixture.is_empty() {
        return Err(Error::EmptyInput);
    }
    let rows: Vec<AgreementRow> = map_bounded(fixture, judge.max_in_flight(), |(cq, spec, expected)| {
        let r = judge_relevance(cq, spec, judge);
        AgreementRow {
            cq_id: cq.cq_id.clone(),
            expected: *expected,
            actual: r.as_ref().ok().map(|r| r.score),
            error: r.err().map(|e| e.to_string()),
        }
    });
    let n = rows.len() as f64;
    let count = |tol: u8| {
        rows.iter()
            .filter(|r| r.actual.is_some_and(|a| a.abs_diff(r.expected) <= tol))
            .count() as f64
    };
    Ok(AgreementReport {
        judge_id: judge.id().to_owned(),
        exact_match: count(0) / n,
        off_by_one: count(1) / n,
        rows,
    })
}
