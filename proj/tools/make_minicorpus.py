#!/usr/bin/env python3
"""Generate a small synthetic treebank in .dis format plus a split manifest."""

import argparse
import random
from pathlib import Path

MONO = [
    "attribution", "background", "circumstance", "cause", "result",
    "consequence-s", "comparison", "condition", "hypothetical", "concession",
    "antithesis", "elaboration-additional", "elaboration-object-attribute-e",
    "elaboration-general-specific", "example", "purpose", "enablement",
    "evaluation-s", "interpretation-s", "comment", "evidence",
    "explanation-argumentative", "reason", "manner", "means", "summary",
    "restatement", "temporal-after", "temporal-before", "topic-shift",
    "problem-solution-s", "question-answer-s",
]
MULTI = ["List", "Contrast", "Sequence", "Same-Unit", "Disjunction",
         "Cause-Result", "Temporal-Same-Time", "TextualOrganization"]
WORDS = ("the company said its profits rose sharply in the third quarter "
         "while analysts expected a modest decline because costs fell and "
         "demand for new products grew faster than planned although some "
         "investors remained cautious about the outlook for next year").split()


def edu_text(rng):
    return " ".join(rng.choice(WORDS) for _ in range(rng.randint(3, 12))).capitalize()


def build(rng, first, last):
    """Returns (children, kind) for span first..last; kind 'mono' or 'multi'."""
    n = last - first + 1
    if n == 1:
        return None
    if n >= 3 and rng.random() < 0.25:
        parts = rng.randint(3, min(n, 4))
        cuts = sorted(rng.sample(range(first + 1, last + 1), parts - 1))
        bounds = [first] + cuts + [last + 1]
        rel = rng.choice(MULTI)
        return [("Nucleus", rel, bounds[i], bounds[i + 1] - 1) for i in range(parts)]
    k = rng.randint(first, last - 1)
    rel = rng.choice(MONO)
    if rng.random() < 0.2:
        rel2 = rng.choice(MULTI)
        return [("Nucleus", rel2, first, k), ("Nucleus", rel2, k + 1, last)]
    if rng.random() < 0.6:
        return [("Nucleus", "span", first, k), ("Satellite", rel, k + 1, last)]
    return [("Satellite", rel, first, k), ("Nucleus", "span", k + 1, last)]


def render(rng, texts, role, rel, first, last, depth, out):
    pad = "  " * depth
    if first == last:
        head = f"{pad}( {role} (leaf {first})"
        if rel:
            head += f" (rel2par {rel})"
        out.append(f"{head} (text _!{texts[first]}_!) )")
        return
    head = f"{pad}( {role} (span {first} {last})"
    if rel:
        head += f" (rel2par {rel})"
    out.append(head)
    for crole, crel, a, b in build(rng, first, last):
        render(rng, texts, crole, crel, a, b, depth + 1, out)
    out.append(f"{pad})")


def document(rng, n):
    texts = {i: edu_text(rng) for i in range(1, n + 1)}
    out = []
    render(rng, texts, "Root", None, 1, n, 0, out)
    return "\n".join(out) + "\n"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", type=Path)
    ap.add_argument("--docs", type=int, default=24)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--min-edus", type=int, default=2)
    ap.add_argument("--max-edus", type=int, default=40)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    ids = []
    for i in range(args.docs):
        n = rng.randint(args.min_edus, args.max_edus) if i else args.min_edus
        doc_id = f"mini_{i:04d}"
        (args.out / f"{doc_id}.dis").write_text(document(rng, n), encoding="utf-8")
        ids.append(doc_id)

    n_test = max(1, args.docs // 3)
    n_dev = max(1, args.docs // 6)
    splits = {"test": ids[:n_test], "dev": ids[n_test:n_test + n_dev],
              "train": ids[n_test + n_dev:]}
    lines = ["# split<TAB>document id"]
    for name in ("train", "dev", "test"):
        lines.append(f"@size\t{name}\t{len(splits[name])}")
    for name in ("train", "dev", "test"):
        lines += [f"{name}\t{d}" for d in splits[name]]
    (args.out / "splits.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
