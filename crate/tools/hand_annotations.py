"""Hand-written dependency parses (spaCy-style English labels) for the
wtgw.llama31-8b stand-in set and the "What caused this event ?" example.

Writes the same parses twice: as the annotation JSONL consumed by compcq
and as CoNLL-U with `# chunks =` comments, so the converter can be checked
against the JSONL.
"""
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent
PARSER_ID = "hand/spacy-style-en-1"

# Each token: (text, upos, head, deprel); head is 0-based, root points at itself.
PARSES = {
    "wtgw.llama31-8b-001": ([
        ("What", "PRON", 4, "pobj"), ("is", "AUX", 1, "ROOT"), ("the", "DET", 3, "det"),
        ("weather", "NOUN", 1, "nsubj"), ("like", "ADP", 1, "prep"), ("in", "ADP", 1, "prep"),
        ("the", "DET", 7, "det"), ("park", "NOUN", 5, "pobj"), ("?", "PUNCT", 1, "punct"),
    ], [[0, 1], [2, 4], [6, 8]]),
    "wtgw.llama31-8b-002": ([
        ("How", "ADV", 1, "advmod"), ("crowded", "ADJ", 2, "acomp"), ("is", "AUX", 2, "ROOT"),
        ("the", "DET", 4, "det"), ("park", "NOUN", 2, "nsubj"), ("?", "PUNCT", 2, "punct"),
    ], [[3, 5]]),
    "wtgw.llama31-8b-003": ([
        ("Where", "ADV", 4, "advmod"), ("is", "AUX", 4, "auxpass"), ("the", "DET", 3, "det"),
        ("park", "NOUN", 4, "nsubjpass"), ("located", "VERB", 4, "ROOT"), ("?", "PUNCT", 4, "punct"),
    ], [[2, 4]]),
    "wtgw.llama31-8b-004": ([
        ("What", "DET", 1, "det"), ("activities", "NOUN", 4, "dobj"), ("can", "AUX", 4, "aux"),
        ("visitors", "NOUN", 4, "nsubj"), ("do", "VERB", 4, "ROOT"), ("in", "ADP", 4, "prep"),
        ("the", "DET", 7, "det"), ("park", "NOUN", 5, "pobj"), ("?", "PUNCT", 4, "punct"),
    ], [[0, 2], [3, 4], [6, 8]]),
    "wtgw.llama31-8b-005": ([
        ("What", "PRON", 1, "attr"), ("is", "AUX", 1, "ROOT"), ("the", "DET", 4, "det"),
        ("best", "ADJ", 4, "amod"), ("time", "NOUN", 1, "nsubj"), ("to", "PART", 6, "aux"),
        ("visit", "VERB", 4, "acl"), ("the", "DET", 8, "det"), ("park", "NOUN", 6, "dobj"),
        ("?", "PUNCT", 1, "punct"),
    ], [[0, 1], [2, 5], [7, 9]]),
    "wtgw.llama31-8b-006": ([
        ("How", "ADV", 1, "advmod"), ("much", "ADJ", 4, "dobj"), ("does", "AUX", 4, "aux"),
        ("it", "PRON", 4, "nsubj"), ("cost", "VERB", 4, "ROOT"), ("to", "PART", 6, "aux"),
        ("enter", "VERB", 4, "xcomp"), ("the", "DET", 8, "det"), ("park", "NOUN", 6, "dobj"),
        ("?", "PUNCT", 4, "punct"),
    ], [[3, 4], [7, 9]]),
    "wtgw.llama31-8b-007": ([
        ("Which", "DET", 1, "det"), ("park", "NOUN", 5, "dobj"), ("should", "AUX", 5, "aux"),
        ("the", "DET", 4, "det"), ("user", "NOUN", 5, "nsubj"), ("visit", "VERB", 5, "ROOT"),
        ("?", "PUNCT", 5, "punct"),
    ], [[0, 2], [3, 5]]),
    "wtgw.llama31-8b-008": ([
        ("Is", "AUX", 0, "ROOT"), ("the", "DET", 2, "det"), ("park", "NOUN", 0, "nsubj"),
        ("open", "ADJ", 0, "acomp"), ("?", "PUNCT", 0, "punct"),
    ], [[1, 3]]),
}

WHAT_CAUSED = ("fx-001", [
    ("What", "PRON", 1, "nsubj"), ("caused", "VERB", 1, "ROOT"), ("this", "DET", 3, "det"),
    ("event", "NOUN", 1, "dobj"), ("?", "PUNCT", 1, "punct"),
], [[2, 4]])


def record(cq_id, toks, chunks):
    return {
        "cq_id": cq_id,
        "parser_id": PARSER_ID,
        "tokens": [{"i": i, "text": t, "upos": u, "head": h, "deprel": d} for i, (t, u, h, d) in enumerate(toks)],
        "noun_chunks": chunks,
    }


def conllu(cq_id, toks, chunks):
    lines = [f"# sent_id = {cq_id}", f"# parser_id = {PARSER_ID}",
             f"# text = {' '.join(t for t, *_ in toks)}", f"# chunks = {json.dumps(chunks)}"]
    for i, (t, u, h, d) in enumerate(toks):
        head = 0 if h == i else h + 1
        deprel = "root" if h == i else d
        lines.append("\t".join([str(i + 1), t, "_", u, "_", "_", str(head), deprel, "_", "_"]))
    return "\n".join(lines) + "\n"


def main():
    ann_dir = ROOT / "corpus" / "annotations"
    ann_dir.mkdir(parents=True, exist_ok=True)
    fx_dir = ROOT / "crates" / "core" / "tests" / "fixtures"
    fx_dir.mkdir(parents=True, exist_ok=True)
    recs = [record(k, *v) for k, v in PARSES.items()]
    (ann_dir / "wtgw.llama31-8b.jsonl").write_text("".join(json.dumps(r) + "\n" for r in recs))
    (fx_dir / "wtgw.llama31-8b.conllu").write_text("\n".join(conllu(k, *v) for k, v in PARSES.items()))
    (fx_dir / "what_caused.jsonl").write_text(json.dumps(record(*WHAT_CAUSED)) + "\n")
    (fx_dir / "what_caused.conllu").write_text(conllu(*WHAT_CAUSED))


if __name__ == "__main__":
    main()
