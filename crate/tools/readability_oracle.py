"""Exact-arithmetic FKGL/DCR values for a fixed set of token statistics.

Writes crates/core/tests/fixtures/readability_oracle.json. Values are
computed with fractions.Fraction and converted to float only at the end.
"""
import json
import pathlib
from fractions import Fraction as F

# (sentences, words, syllables, difficult words)
STATS = [
    (1, 4, 5, 0), (1, 5, 9, 2), (1, 7, 10, 1), (1, 10, 17, 4), (1, 12, 20, 3),
    (2, 12, 15, 0), (1, 3, 3, 0), (1, 1, 1, 0), (1, 1, 6, 1), (3, 30, 45, 6),
    (1, 20, 33, 7), (2, 25, 41, 9), (1, 8, 14, 5), (1, 6, 6, 0), (4, 17, 22, 2),
    (1, 15, 31, 8), (1, 9, 12, 2), (2, 9, 11, 1), (1, 35, 60, 11), (5, 50, 71, 13),
]


def fkgl(s, w, syl):
    return F(118, 10) * F(syl, w) + F(39, 100) * F(w, s) - F(1559, 100)


def dcr(s, w, dw):
    return F(1579, 10000) * (F(dw, w) * 100) + F(496, 10000) * F(w, s)


rows = [
    {
        "n_sentences": s, "n_words": w, "n_syllables": syl, "n_difficult_words": dw,
        "fkgl": float(fkgl(s, w, syl)), "dcr": float(dcr(s, w, dw)),
    }
    for s, w, syl, dw in STATS
]
out = pathlib.Path(__file__).resolve().parent.parent / "crates/core/tests/fixtures/readability_oracle.json"
out.write_text(json.dumps(rows, indent=1) + "\n")
print(f"wrote {len(rows)} rows to {out}")
