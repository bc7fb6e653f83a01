"""Deterministic 384-dim stand-in sentence vectors for the bundled CQ sets.

No neural encoder is involved: each text becomes a signed feature-hashing
vector over lowercased word unigrams (weight 1.0) and character trigrams of
each word (weight 0.5), then L2-normalised. Hashing uses sha256 so output is
stable across Python versions and platforms.

Usage: python3 tools/fixture_vectors.py [corpus_dir]
"""
import hashlib
import json
import math
import pathlib
import re
import sys

DIM = 384
MODEL_ID = "fixture/hashed-bow-384"
STOP = {"a", "an", "the", "of", "in", "on", "to", "is", "are", "was", "for", "by", "and", "with", "which",
        "what", "who", "how", "does", "do", "it", "be", "at", "from", "that", "this", "each", "given"}


def bucket(feature):
    h = hashlib.sha256(feature.encode("utf-8")).digest()
    idx = int.from_bytes(h[:4], "big") % DIM
    sign = 1.0 if h[4] & 1 else -1.0
    return idx, sign


def embed(text):
    v = [0.0] * DIM
    words = [w for w in re.findall(r"[a-z0-9]+", text.lower()) if w not in STOP]
    for w in words:
        i, s = bucket("w:" + w)
        v[i] += s
        padded = f"#{w}#"
        for k in range(len(padded) - 2):
            i, s = bucket("c:" + padded[k:k + 3])
            v[i] += 0.5 * s
    if not any(v):
        i, s = bucket("empty")
        v[i] = s
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v]


def write_set(set_path, out_dir):
    rows = [json.loads(line) for line in set_path.read_text().splitlines() if line.strip()]
    set_id = rows[0]["set_id"]
    header = {"model_id": MODEL_ID, "dim": DIM, "count": len(rows), "set_id": set_id}
    lines = [json.dumps(header)]
    for r in rows:
        lines.append(json.dumps({"cq_id": r["cq_id"], "v": embed(r["text"])}))
    out = out_dir / f"{set_id}.vec.jsonl"
    out.write_text("\n".join(lines) + "\n")
    return out


def main():
    corpus = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else \
        pathlib.Path(__file__).resolve().parent.parent / "corpus"
    out_dir = corpus / "vectors"
    out_dir.mkdir(parents=True, exist_ok=True)
    for p in sorted((corpus / "sets").glob("*.jsonl")):
        print(write_set(p, out_dir))


if __name__ == "__main__":
    main()
