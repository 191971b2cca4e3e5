#!/usr/bin/env python3
"""Synthesize a small WAV corpus with transcripts, for trying the pipeline
end to end without downloading anything.

Produces <out>/clips/*.wav and <out>/corpus.tsv (path, sentence columns).
A few rows are intentionally silent so the QC stage has something to find.
"""

import argparse
from pathlib import Path

import numpy as np

from asrkit import AudioClip, write_wav

SENTENCES = [
    "é necessário fornecer uma avaliação",
    "o rio corre para o mar",
    "a casa fica perto da praça",
    "hoje o vento está forte",
    "ela leu o livro inteiro",
    "o comboio parte ao meio dia",
    "как дела сегодня",
    "мы идём домой вечером",
    "السلام عليكم",
    "كَتَبَ الوَلَد",
]


def synth_utterance(gen: np.random.Generator, rate: int, duration: float) -> np.ndarray:
    """Harmonic tone stack with vibrato and noise; crude but speech-shaped."""
    n = int(duration * rate)
    t = np.arange(n) / rate
    f0 = gen.uniform(110, 280)
    vibrato = 1.0 + 0.01 * np.sin(2 * np.pi * gen.uniform(4, 7) * t)
    x = np.zeros(n)
    for k, a in ((1, 0.5), (2, 0.25), (3, 0.12), (4, 0.06)):
        x += a * np.sin(2 * np.pi * k * f0 * vibrato * t + gen.uniform(0, 2 * np.pi))
    envelope = 0.3 + 0.7 * np.abs(np.sin(2 * np.pi * gen.uniform(1.5, 3.5) * t))
    x = x * envelope + 0.01 * gen.standard_normal(n)
    return 0.6 * x / np.max(np.abs(x))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="corpus output directory")
    parser.add_argument("--rows", type=int, default=40)
    parser.add_argument("--rate", type=int, default=16000)
    parser.add_argument("--duration", type=float, default=1.0)
    parser.add_argument("--silent-every", type=int, default=13,
                        help="make every Nth clip silent (0 disables)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out = Path(args.out)
    (out / "clips").mkdir(parents=True, exist_ok=True)
    gen = np.random.default_rng(args.seed)

    lines = ["path\tsentence"]
    for i in range(args.rows):
        name = f"demo{i:04d}.wav"
        if args.silent_every and i % args.silent_every == args.silent_every - 1:
            samples = np.zeros(int(args.duration * args.rate))
        else:
            samples = synth_utterance(gen, args.rate, args.duration)
        write_wav(AudioClip(samples, args.rate), out / "clips" / name)
        lines.append(f"clips/{name}\t{SENTENCES[i % len(SENTENCES)]}")
    (out / "corpus.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    print(f"wrote {args.rows} clips under {out}")
    print("next steps:")
    print(f"  asrkit ingest --tsv {out}/corpus.tsv --audio-root {out} --out {out}/ingested")
    print(f"  asrkit plan --manifest {out}/ingested/manifest.tsv --seed 1 --out {out}/plan")
    print(f"  asrkit augment --plan {out}/plan/plan.json --config all --out-dir {out}/augmented")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
