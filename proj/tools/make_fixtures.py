#!/usr/bin/env python3
"""Regenerates the synthetic corpora in data/. Deterministic."""
import json
import random
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "data"

WORDS = (
    "lecture notes cover the midterm review and grading policy "
    "students discuss homework deadlines project topics lab sessions "
    "professor explains recursion sorting graphs proofs matrices vectors "
    "exam schedule office hours quiz answers syllabus chapter section "
    "thermodynamics circuits signals statics dynamics materials design"
).split()


def sentence(rng, lo=4, hi=9):
    return " ".join(rng.choice(WORDS) for _ in range(rng.randint(lo, hi)))


def record(rng, doc_id, group, n_sentences=8):
    sents = [sentence(rng) for _ in range(n_sentences)]
    # reference reuses corpus words so toy models can actually learn to copy
    ref = " ".join(rng.choice(WORDS) for _ in range(rng.randint(6, 12)))
    picks = sorted(rng.sample(range(n_sentences), 2))
    return {
        "doc_id": doc_id,
        "group": group,
        "split": "train",
        "sentences": sents,
        "abstractive_ref": ref,
        "extractive_ref": [sents[i] for i in picks],
    }


def write_jsonl(path, records):
    with open(path, "w", newline="\n") as f:
        for r in records:
            f.write(json.dumps(r) + "\n")


def main():
    DATA.mkdir(exist_ok=True)

    rng = random.Random(20240817)
    groups = [("CS", 138), ("ENGR", 52), ("S2015", 88), ("S2016", 92)]
    records = []
    for group, n in groups:
        for i in range(n):
            records.append(record(rng, f"{group.lower()}-{i:03d}", group))
    write_jsonl(DATA / "cm_fixture.jsonl", records)

    rng = random.Random(99)
    toy = []
    for group, n in [("alpha", 10), ("beta", 10)]:
        for i in range(n):
            toy.append(record(rng, f"{group}-{i:02d}", group, n_sentences=3))
    write_jsonl(DATA / "toy.jsonl", toy)

    rng = random.Random(7)
    with open(DATA / "msrp_fixture.tsv", "w", newline="\n") as f:
        for i in range(10):
            label = i % 2
            s1 = sentence(rng, 5, 8)
            s2 = s1 if label == 1 else sentence(rng, 5, 8)
            f.write(f"{label}\t{s1}\t{s2}\n")


if __name__ == "__main__":
    main()
