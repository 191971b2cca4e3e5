#!/usr/bin/env python3
"""Run the full augmentation-combination experiment on a corpus TSV.

Ingests the corpus, builds the eight training-set compositions (clean
baseline, three single augmentations, three pairs, one triple), materializes
each one, and prints a summary table. Optionally scores a degraded copy of
the references to demonstrate the WER/CER report.
"""

import argparse
import json
import random
from pathlib import Path

from asrkit.cli import main as cli_main
from asrkit import ingest_tsv, score_corpus


def degrade(sentence: str, gen: random.Random) -> str:
    """Simulate an imperfect transcriber: drop/merge/typo a few tokens."""
    words = sentence.split()
    out = []
    for w in words:
        roll = gen.random()
        if roll < 0.1:
            continue  # dropped word
        if roll < 0.2 and len(w) > 2:
            k = gen.randrange(len(w) - 1)
            w = w[:k] + w[k + 1] + w[k] + w[k + 2:]  # swapped chars
        out.append(w)
    return " ".join(out) if out else sentence


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--corpus", required=True, help="directory holding corpus.tsv + clips/")
    parser.add_argument("--out", required=True, help="experiment output directory")
    parser.add_argument("--fraction", type=float, default=0.2)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--workers", type=int, default=4)
    parser.add_argument("--score-demo", action="store_true",
                        help="also score a synthetically degraded hypothesis set")
    args = parser.parse_args()

    corpus = Path(args.corpus)
    out = Path(args.out)
    steps = [
        ["ingest", "--tsv", str(corpus / "corpus.tsv"), "--audio-root", str(corpus),
         "--out", str(out / "ingested")],
        ["plan", "--manifest", str(out / "ingested" / "manifest.tsv"),
         "--fraction", str(args.fraction), "--seed", str(args.seed), "--out", str(out / "plan")],
        ["augment", "--plan", str(out / "plan" / "plan.json"), "--config", "all",
         "--workers", str(args.workers), "--out-dir", str(out / "augmented")],
    ]
    for step in steps:
        code = cli_main(step)
        if code != 0:
            print(f"step failed ({code}): {' '.join(step)}")
            return code

    plan_doc = json.loads((out / "plan" / "plan.json").read_text())
    print(f"\n{'config':<12} {'rows':>6}")
    for cfg in plan_doc["configs"]:
        print(f"{cfg['name']:<12} {cfg['rows']:>6}")

    if args.score_demo:
        manifest, _ = ingest_tsv(out / "ingested" / "manifest.tsv", out / "ingested")
        gen = random.Random(args.seed)
        pairs = [(r.source_id, r.sentence, degrade(r.sentence, gen)) for r in manifest.records]
        report = score_corpus(pairs)
        print("\nscoring a synthetically degraded transcriber:")
        print(report.to_table())
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
