use std::path::PathBuf;

use compcq_core::annotation::{load_annotations, parse_conllu, Annotation};
use compcq_core::complexity::{c3_syntactic, canonical_deprel, TRACKED_RELATIONS};
use compcq_core::corpus::{load_corpus, load_cqset, SpecKind};

fn repo(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

/// Per-model set sizes of the published result tables.
const SET_SIZES: [(&str, usize); 8] = [
    ("bme.gemini", 35),
    ("bme.gpt", 25),
    ("musicmeta.gemini", 31),
    ("wtgw.gemini", 28),
    ("wtgw.gpt", 20),
    ("wtgw.llama31-8b", 8),
    ("pjo.kimik2", 20),
    ("pdto.llama32-3b", 10),
];

#[test]
fn bundled_sets_have_published_sizes() {
    for (set_id, n) in SET_SIZES {
        let set = load_cqset(repo(&format!("corpus/sets/{set_id}.jsonl"))).unwrap();
        assert_eq!(set.len(), n, "{set_id}");
        assert_eq!(set.set_id, set_id);
    }
}

#[test]
fn bundled_specs_have_expected_kinds() {
    let specs = load_corpus(repo("corpus/specs")).unwrap();
    assert_eq!(specs.len(), 5);
    for s in specs {
        let want = match s.spec_id.as_str() {
            "musicmeta" | "bme" => SpecKind::UserStory,
            _ => SpecKind::UseCase,
        };
        assert_eq!(s.kind, want, "{}", s.spec_id);
    }
}

fn same_parse(a: &Annotation, b: &Annotation) -> bool {
    a.cq_id == b.cq_id
        && a.parser_id == b.parser_id
        && a.noun_chunks == b.noun_chunks
        && a.tokens.len() == b.tokens.len()
        && a.tokens.iter().zip(&b.tokens).all(|(x, y)| {
            x.index == y.index
                && x.text == y.text
                && x.upos == y.upos
                && x.head == y.head
                && x.deprel.to_lowercase() == y.deprel.to_lowercase()
        })
}

#[test]
fn conllu_converter_matches_jsonl() {
    for (conllu, jsonl) in [
        (fixture("what_caused.conllu"), fixture("what_caused.jsonl")),
        (fixture("wtgw.llama31-8b.conllu"), repo("corpus/annotations/wtgw.llama31-8b.jsonl")),
    ] {
        let from_conllu = parse_conllu(&std::fs::read_to_string(&conllu).unwrap(), "unknown").unwrap();
        let from_json = load_annotations(&jsonl).unwrap();
        assert_eq!(from_conllu.len(), from_json.len());
        for a in &from_conllu {
            assert!(same_parse(a, &from_json[&a.cq_id]), "{}", a.cq_id);
        }
    }
}

#[test]
fn what_caused_has_one_root_and_scores_nine() {
    let anns = load_annotations(fixture("what_caused.jsonl")).unwrap();
    let a = &anns["fx-001"];
    assert_eq!(a.tokens.iter().filter(|t| t.is_root()).count(), 1);
    assert_eq!(c3_syntactic(a).score(), 9);
}

#[test]
fn c3_decomposes_on_every_fixture() {
    let anns = load_annotations(repo("corpus/annotations/wtgw.llama31-8b.jsonl")).unwrap();
    assert_eq!(anns.len(), 8);
    let set = load_cqset(repo("corpus/sets/wtgw.llama31-8b.jsonl")).unwrap();
    for cq in &set.cqs {
        let a = &anns[&cq.cq_id];
        let c = c3_syntactic(a);
        let tracked = a
            .tokens
            .iter()
            .filter(|t| TRACKED_RELATIONS.contains(&canonical_deprel(&t.deprel).as_str()))
            .count();
        assert_eq!(c.score(), a.tokens.len() + a.depth() + tracked, "{}", cq.cq_id);
        assert!(a.depth() < a.tokens.len());
    }
}
