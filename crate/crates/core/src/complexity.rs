//! The four complexity axes of a CQ.
//!
//! * `c0`: character length of the trimmed text.
//! * `c1`: count of ontological primitives extracted by a judge model.
//! * `c2`: lexical tallies over an annotation (noun chunks, verbs,
//!   prepositions, coordinating conjunctions, modifiers).
//! * `c3`: dependency-tree size, depth and selected relation counts.
//!
//! All sums use equal weights.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::annotation::Annotation;
use crate::corpus::{CompetencyQuestion, RequirementSpec};
use crate::error::{Error, Result};
use crate::judge::{map_bounded, Judge};

pub const C1_PROMPT_TEMPLATE: &str = include_str!("../prompts/c1_extract.txt");
pub const PRIMITIVES_SCHEMA: &str = include_str!("../schemas/primitives.json");

/// Relations counted by `c3`, in canonical (classic) label form.
pub const TRACKED_RELATIONS: [&str; 7] = ["nsubj", "dobj", "prep", "acl", "relcl", "conj", "agent"];

pub fn c0_length(text: &str) -> Result<usize> {
    let n = text.trim().chars().count();
    if n == 0 {
        return Err(Error::Domain("empty CQ text".into()));
    }
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cardinality {
    Single,
    Multiple,
    Existence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequirementPrimitives {
    pub concepts: Vec<String>,
    pub properties: Vec<String>,
    pub relationships: Vec<String>,
    pub filters: Vec<String>,
    pub cardinality: Cardinality,
    pub aggregations: Vec<String>,
}

fn dedup_ci(items: Vec<String>) -> Vec<String> {
    let mut seen = HashSet::new();
    items
        .into_iter()
        .map(|s| s.trim().to_owned())
        .filter(|s| !s.is_empty() && seen.insert(s.to_lowercase()))
        .collect()
}

impl RequirementPrimitives {
    pub fn empty(cardinality: Cardinality) -> Self {
        Self {
            concepts: vec![],
            properties: vec![],
            relationships: vec![],
            filters: vec![],
            cardinality,
            aggregations: vec![],
        }
    }

    /// Trims entries, drops blanks and removes case-insensitive duplicates.
    pub fn normalized(self) -> Self {
        Self {
            concepts: dedup_ci(self.concepts),
            properties: dedup_ci(self.properties),
            relationships: dedup_ci(self.relationships),
            filters: dedup_ci(self.filters),
            cardinality: self.cardinality,
            aggregations: dedup_ci(self.aggregations),
        }
    }
}

/// Sum of list sizes plus one point when the cardinality is `multiple`.
pub fn c1_score(p: &RequirementPrimitives) -> usize {
    p.concepts.len()
        + p.properties.len()
        + p.relationships.len()
        + p.filters.len()
        + p.aggregations.len()
        + usize::from(p.cardinality == Cardinality::Multiple)
}

/// Pulls the JSON object out of a judge reply (tolerating code fences and
/// surrounding prose) and validates it against the primitives schema.
pub fn parse_primitives(reply: &str) -> std::result::Result<RequirementPrimitives, String> {
    let start = reply.find('{').ok_or("reply contains no JSON object")?;
    let end = reply.rfind('}').ok_or("reply contains no JSON object")?;
    if end < start {
        return Err("reply contains no JSON object".into());
    }
    let mut value: serde_json::Value =
        serde_json::from_str(&reply[start..=end]).map_err(|e| format!("invalid JSON: {e}"))?;
    if let Some(card) = value.get_mut("cardinality") {
        if let Some(s) = card.as_str() {
            *card = serde_json::Value::String(s.trim().to_lowercase());
        }
    }
    let p: RequirementPrimitives =
        serde_json::from_value(value).map_err(|e| format!("schema violation: {e}"))?;
    Ok(p.normalized())
}

pub fn fill_template(template: &str, spec: &RequirementSpec, cq_text: &str) -> String {
    template
        .replace("{{requirements}}", spec.body.trim())
        .replace("{{cq}}", cq_text.trim())
}

pub fn c1_prompt(cq: &CompetencyQuestion, spec: &RequirementSpec) -> String {
    fill_template(C1_PROMPT_TEMPLATE, spec, &cq.text)
}

fn repair_prompt(prompt: &str) -> String {
    format!(
        "{prompt}\n\nYour previous reply could not be used. Reply with one JSON object only, valid against this JSON Schema:\n{PRIMITIVES_SCHEMA}"
    )
}

/// Asks the judge for the primitives of one CQ, with one schema-carrying
/// re-prompt if the first reply does not validate.
pub fn extract_primitives(
    cq: &CompetencyQuestion,
    spec: &RequirementSpec,
    judge: &Judge,
) -> Result<RequirementPrimitives> {
    let prompt = c1_prompt(cq, spec);
    let first = judge.ask(&prompt, &cq.text)?;
    let first_err = match parse_primitives(&first) {
        Ok(p) => return Ok(p),
        Err(e) => e,
    };
    let second = judge.ask(&repair_prompt(&prompt), &cq.text)?;
    parse_primitives(&second).map_err(|e| Error::Extraction {
        cq_id: cq.cq_id.clone(),
        message: format!("{first_err}; after re-prompt: {e}"),
    })
}

/// [`extract_primitives`] over many CQs with the judge's in-flight bound.
pub fn extract_batch(
    cqs: &[CompetencyQuestion],
    spec: &RequirementSpec,
    judge: &Judge,
) -> Vec<Result<RequirementPrimitives>> {
    map_bounded(cqs, judge.max_in_flight(), |cq| extract_primitives(cq, spec, judge))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LexicalCounts {
    pub noun_chunks: usize,
    pub verbs: usize,
    pub prepositions: usize,
    pub coordinating_conjunctions: usize,
    pub modifiers: usize,
}

impl LexicalCounts {
    pub fn score(&self) -> usize {
        self.noun_chunks + self.verbs + self.prepositions + self.coordinating_conjunctions + self.modifiers
    }
}

/// Universal POS tallies (`VERB`, `ADP`, `CCONJ`, `ADJ` + `ADV`) plus noun
/// chunks. Punctuation never matches any of these tags.
pub fn c2_lexical(ann: &Annotation) -> LexicalCounts {
    let mut c = LexicalCounts {
        noun_chunks: ann.noun_chunks.len(),
        ..Default::default()
    };
    for t in ann.tokens.iter().filter(|t| !t.is_punct()) {
        match t.upos.to_ascii_uppercase().as_str() {
            "VERB" => c.verbs += 1,
            "ADP" => c.prepositions += 1,
            "CCONJ" => c.coordinating_conjunctions += 1,
            "ADJ" | "ADV" => c.modifiers += 1,
            _ => {}
        }
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interrogative {
    WhRetrieval,
    BooleanCheck,
    Aggregation,
    Other,
}

const WH_WORDS: [&str; 9] = ["what", "which", "who", "whom", "whose", "where", "when", "why", "how"];
const AUX_WORDS: [&str; 19] = [
    "is", "are", "was", "were", "do", "does", "did", "can", "could", "should", "has", "have", "had",
    "will", "would", "may", "might", "must", "shall",
];

/// Aggregation (`how many` / `how much`) first, then WH-retrieval, then
/// boolean check (leading auxiliary or modal), otherwise `other`.
pub fn classify_interrogative(ann: &Annotation) -> Interrogative {
    let mut content = ann
        .tokens
        .iter()
        .filter(|t| !t.is_punct())
        .map(|t| t.text.to_lowercase());
    let first = content.next();
    let second = content.next();
    match (first.as_deref(), second.as_deref()) {
        (Some("how"), Some("many" | "much")) => Interrogative::Aggregation,
        (Some(w), _) if WH_WORDS.contains(&w) => Interrogative::WhRetrieval,
        (Some(w), _) if AUX_WORDS.contains(&w) => Interrogative::BooleanCheck,
        _ => Interrogative::Other,
    }
}

/// Maps newer universal-dependency labels onto the classic labels counted by `c3`.
pub fn canonical_deprel(label: &str) -> String {
    let l = label.trim().to_ascii_lowercase();
    match l.as_str() {
        "obj" => "dobj".into(),
        "acl:relcl" => "relcl".into(),
        "obl:agent" => "agent".into(),
        _ => l,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntaxOptions {
    /// Count punctuation tokens as tree nodes.
    pub count_punct: bool,
}

impl Default for SyntaxOptions {
    fn default() -> Self {
        Self { count_punct: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntacticCounts {
    pub node_count: usize,
    pub depth: usize,
    /// Count per tracked relation, zero entries included.
    pub relations: BTreeMap<String, usize>,
}

impl SyntacticCounts {
    pub fn score(&self) -> usize {
        self.node_count + self.depth + self.relations.values().sum::<usize>()
    }
}

pub fn c3_syntactic(ann: &Annotation) -> SyntacticCounts {
    c3_syntactic_with(ann, SyntaxOptions::default())
}

pub fn c3_syntactic_with(ann: &Annotation, opts: SyntaxOptions) -> SyntacticCounts {
    let node_count = if opts.count_punct {
        ann.tokens.len()
    } else {
        ann.tokens.iter().filter(|t| !t.is_punct()).count()
    };
    let mut relations: BTreeMap<String, usize> =
        TRACKED_RELATIONS.iter().map(|r| (r.to_string(), 0)).collect();
    for t in &ann.tokens {
        if let Some(n) = relations.get_mut(&canonical_deprel(&t.deprel)) {
            *n += 1;
        }
    }
    SyntacticCounts {
        node_count,
        depth: ann.depth(),
        relations,
    }
}

/// Per-CQ complexity record. `c1` is absent when no judge was used or
/// extraction failed; `c2`/`c3` are absent without an annotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityProfile {
    pub c0: usize,
    pub c1: Option<usize>,
    pub c2: Option<usize>,
    pub c3: Option<usize>,
    pub interrogative: Option<Interrogative>,
}

pub fn profile(
    cq: &CompetencyQuestion,
    primitives: Option<&RequirementPrimitives>,
    ann: Option<&Annotation>,
    opts: SyntaxOptions,
) -> Result<ComplexityProfile> {
    Ok(ComplexityProfile {
        c0: c0_length(&cq.text)?,
        c1: primitives.map(c1_score),
        c2: ann.map(|a| c2_lexical(a).score()),
        c3: ann.map(|a| c3_syntactic_with(a, opts).score()),
        interrogative: ann.map(classify_interrogative),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::Token;
    use crate::corpus::SpecKind;
    use crate::llm::StubClient;
    use std::sync::Arc;

    fn tok(index: usize, text: &str, upos: &str, head: usize, deprel: &str) -> Token {
        Token {
            index,
            text: text.into(),
            upos: upos.into(),
            head,
            deprel: deprel.into(),
        }
    }

    fn what_caused() -> Annotation {
        Annotation {
            cq_id: "fx-001".into(),
            parser_id: "test".into(),
            tokens: vec![
                tok(0, "What", "PRON", 1, "nsubj"),
                tok(1, "caused", "VERB", 1, "ROOT"),
                tok(2, "this", "DET", 3, "det"),
                tok(3, "event", "NOUN", 1, "dobj"),
                tok(4, "?", "PUNCT", 1, "punct"),
            ],
            noun_chunks: vec![[2, 4]],
        }
    }

    fn words(ws: &[(&str, &str)]) -> Annotation {
        let tokens = ws
            .iter()
            .enumerate()
            .map(|(i, (w, pos))| tok(i, w, pos, 0, if i == 0 { "ROOT" } else { "dep" }))
            .collect();
        Annotation {
            cq_id: "w".into(),
            parser_id: "t".into(),
            tokens,
            noun_chunks: vec![],
        }
    }

    fn spec() -> RequirementSpec {
        RequirementSpec {
            spec_id: "mm".into(),
            kind: SpecKind::UserStory,
            domain: "music".into(),
            title: "Music".into(),
            body: "Artists release albums.".into(),
        }
    }

    fn cq(text: &str) -> CompetencyQuestion {
        CompetencyQuestion {
            cq_id: "q1".into(),
            text: text.into(),
            set_id: "s".into(),
        }
    }

    #[test]
    fn c0_examples() {
        assert_eq!(c0_length("Who?").unwrap(), 4);
        assert_eq!(c0_length("What caused this event?").unwrap(), 23);
        assert_eq!(c0_length("  Où est-ce?  ").unwrap(), 10);
        assert!(c0_length("   ").is_err());
    }

    #[test]
    fn c1_examples() {
        assert_eq!(c1_score(&RequirementPrimitives::empty(Cardinality::Single)), 0);
        let p = RequirementPrimitives {
            concepts: vec!["album".into(), "artist".into()],
            properties: vec![],
            relationships: vec!["release".into()],
            filters: vec!["after 1990".into()],
            cardinality: Cardinality::Multiple,
            aggregations: vec!["count".into()],
        };
        assert_eq!(c1_score(&p), 6);
        let mut existence = p.clone();
        existence.cardinality = Cardinality::Existence;
        assert_eq!(c1_score(&existence), 5);
    }

    #[test]
    fn primitives_parse_from_fenced_reply() {
        let reply = "Here you go:\n```json\n{\"concepts\":[\"Event\",\"event\"],\"properties\":[],\"relationships\":[\"caused\"],\"filters\":[],\"cardinality\":\"Single\",\"aggregations\":[]}\n```";
        let p = parse_primitives(reply).unwrap();
        assert_eq!(p.concepts, ["Event"]);
        assert_eq!(p.relationships, ["caused"]);
        assert_eq!(p.cardinality, Cardinality::Single);
    }

    #[test]
    fn primitives_schema_violations() {
        assert!(parse_primitives("The question is about events.").is_err());
        assert!(parse_primitives(r#"{"concepts":[]}"#).is_err());
        assert!(parse_primitives(
            r#"{"concepts":[],"properties":[],"relationships":[],"filters":[],"cardinality":"some","aggregations":[]}"#
        )
        .is_err());
        assert!(parse_primitives(
            r#"{"concepts":[],"properties":[],"relationships":[],"filters":[],"cardinality":"single","aggregations":[],"extra":1}"#
        )
        .is_err());
    }

    #[test]
    fn extraction_repairs_once_then_fails() {
        let good = r#"{"concepts":["event"],"properties":[],"relationships":["caused"],"filters":[],"cardinality":"single","aggregations":[]}"#;
        let stub = Arc::new(StubClient::new("stub/j", ["not json at all", good]));
        let judge = Judge::new(stub.clone());
        let p = extract_primitives(&cq("What caused this event?"), &spec(), &judge).unwrap();
        assert_eq!(c1_score(&p), 2);
        assert_eq!(stub.calls(), 2);

        let prose = Arc::new(StubClient::new("stub/j", ["I think it is about events."]));
        let judge = Judge::new(prose.clone());
        let err = extract_primitives(&cq("What caused this event?"), &spec(), &judge).unwrap_err();
        assert!(matches!(err, Error::Extraction { .. }));
        assert_eq!(prose.calls(), 2);
    }

    #[test]
    fn prompt_embeds_spec_and_cq() {
        let p = c1_prompt(&cq("What caused this event?"), &spec());
        assert!(p.contains("Artists release albums."));
        assert!(p.contains("What caused this event?"));
        assert!(!p.contains("{{"));
    }

    #[test]
    fn c2_example() {
        let ann = what_caused();
        let c = c2_lexical(&ann);
        assert_eq!(c.noun_chunks, 1);
        assert_eq!(c.verbs, 1);
        assert_eq!(c.score(), 2);
    }

    #[test]
    fn c2_empty_tallies() {
        let ann = words(&[("Hmm", "INTJ"), ("?", "PUNCT")]);
        assert_eq!(c2_lexical(&ann).score(), 0);
    }

    #[test]
    fn c2_adding_cconj_adds_one() {
        let a = words(&[("cats", "NOUN"), ("dogs", "NOUN")]);
        let b = words(&[("cats", "NOUN"), ("and", "CCONJ"), ("dogs", "NOUN")]);
        assert_eq!(c2_lexical(&b).score(), c2_lexical(&a).score() + 1);
    }

    #[test]
    fn interrogatives() {
        let agg = words(&[("How", "ADV"), ("many", "ADJ"), ("tracks", "NOUN"), ("?", "PUNCT")]);
        assert_eq!(classify_interrogative(&agg), Interrogative::Aggregation);
        let much = words(&[("how", "ADV"), ("much", "ADV"), ("?", "PUNCT")]);
        assert_eq!(classify_interrogative(&much), Interrogative::Aggregation);
        let how = words(&[("How", "ADV"), ("is", "AUX"), ("it", "PRON")]);
        assert_eq!(classify_interrogative(&how), Interrogative::WhRetrieval);
        assert_eq!(classify_interrogative(&what_caused()), Interrogative::WhRetrieval);
        let boolean = words(&[("Is", "AUX"), ("the", "DET"), ("venue", "NOUN"), ("accessible", "ADJ"), ("?", "PUNCT")]);
        assert_eq!(classify_interrogative(&boolean), Interrogative::BooleanCheck);
        let other = words(&[("List", "VERB"), ("all", "DET"), ("artists", "NOUN"), (".", "PUNCT")]);
        assert_eq!(classify_interrogative(&other), Interrogative::Other);
        let quoted = words(&[("\"", "PUNCT"), ("Which", "DET"), ("park", "NOUN")]);
        assert_eq!(classify_interrogative(&quoted), Interrogative::WhRetrieval);
    }

    #[test]
    fn c3_example() {
        let c = c3_syntactic(&what_caused());
        assert_eq!(c.node_count, 5);
        assert_eq!(c.depth, 2);
        assert_eq!(c.relations["nsubj"], 1);
        assert_eq!(c.relations["dobj"], 1);
        assert_eq!(c.score(), 9);
        let no_punct = c3_syntactic_with(&what_caused(), SyntaxOptions { count_punct: false });
        assert_eq!(no_punct.score(), 8);
    }

    #[test]
    fn c3_single_token() {
        let ann = words(&[("Why", "ADV")]);
        assert_eq!(c3_syntactic(&ann).score(), 1);
    }

    #[test]
    fn c3_obj_alias() {
        let mut ann = what_caused();
        ann.tokens[3].deprel = "obj".into();
        assert_eq!(c3_syntactic(&ann).score(), 9);
        assert_eq!(canonical_deprel("acl:relcl"), "relcl");
        assert_eq!(canonical_deprel("NSUBJ"), "nsubj");
    }

    #[test]
    fn c3_conjunct_increases_score() {
        // "What caused this event and that fire ?" adds cc, det, conj tokens.
        let mut ann = what_caused();
        let base = c3_syntactic(&ann).score();
        ann.tokens.pop();
        ann.tokens.push(tok(4, "and", "CCONJ", 3, "cc"));
        ann.tokens.push(tok(5, "that", "DET", 6, "det"));
        ann.tokens.push(tok(6, "fire", "NOUN", 3, "conj"));
        ann.tokens.push(tok(7, "?", "PUNCT", 1, "punct"));
        ann.validate().unwrap();
        assert!(c3_syntactic(&ann).score() > base);
    }

    #[test]
    fn profile_leaves_missing_inputs_absent() {
        let p = profile(&cq("What caused this event?"), None, None, SyntaxOptions::default()).unwrap();
        assert_eq!(p.c0, 23);
        assert_eq!((p.c1, p.c2, p.c3, p.interrogative), (None, None, None, None));
    }
}
