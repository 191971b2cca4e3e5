"""Command-line surface: ingest, plan, augment, normalize, score.

Every command is rerunnable: identical inputs and flags produce identical
artifacts (timestamps appear only in stderr log lines). Exit codes: 0 ok,
1 usage error, 2 data error (structured JSON message on stderr).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

from .audio import DEFAULT_SILENCE_DB
from .augment import default_augmentations, spec_from_record, spec_to_record
from .corpus import (
    ExperimentPlan,
    Manifest,
    build_plan,
    ingest_tsv,
    materialize,
    qc,
    write_manifest,
)
from .errors import ToolkitError
from .metrics import score_corpus
from .textnorm import NormalizationConfig, normalize

USAGE_ERROR = 1
DATA_ERROR = 2


def _log(level: str, message: str, **fields) -> None:
    rec = {"ts": round(time.time(), 3), "level": level, "msg": message, **fields}
    print(json.dumps(rec, ensure_ascii=False), file=sys.stderr)


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n", "utf-8")


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _pick(flag_value, config: dict, key: str, default):
    """Flag wins over config file wins over built-in default."""
    if flag_value is not None:
        return flag_value
    if key in config:
        return config[key]
    return default


def _norm_config(args: argparse.Namespace, config: dict) -> NormalizationConfig:
    base = NormalizationConfig.from_record(config.get("normalization"))

    def pick(flag, default):
        return default if flag is None else flag

    return NormalizationConfig(
        remove_punctuation=pick(getattr(args, "remove_punctuation", None), base.remove_punctuation),
        remove_special_chars=pick(getattr(args, "remove_special_chars", None), base.remove_special_chars),
        strip_arabic_diacritics=pick(getattr(args, "strip_diacritics", None), base.strip_arabic_diacritics),
        lowercase=pick(getattr(args, "lowercase", None), base.lowercase),
        collapse_whitespace=pick(getattr(args, "collapse_whitespace", None), base.collapse_whitespace),
    )


def _augmentation_specs(config: dict) -> dict:
    specs = default_augmentations()
    for tag, rec in config.get("augmentations", {}).items():
        rec = dict(rec)
        rec.setdefault("tag", tag)
        specs[tag] = spec_from_record(rec)
    return specs


def _effective_config(args: argparse.Namespace, extra: dict) -> dict:
    payload = {"command": args.command, **extra}
    return payload


def cmd_ingest(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    silence_db = _pick(args.silence_db, config, "silence_db", DEFAULT_SILENCE_DB)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    manifest, ingest_summary = ingest_tsv(args.tsv, args.audio_root, language=args.lang)
    manifest, qc_summary = qc(manifest, threshold_db=silence_db, audio_root=args.audio_root)

    # rewrite paths relative to the output manifest's directory
    root = Path(args.audio_root)
    rewritten = [
        replace(r, audio_path=os.path.relpath(os.path.abspath(root / r.audio_path), os.path.abspath(out_dir)))
        for r in manifest.records
    ]
    manifest = Manifest(rewritten, manifest.language, manifest.provenance)

    write_manifest(manifest, out_dir / "manifest.tsv")
    _write_json(out_dir / "qc_summary.json", {"ingest": ingest_summary.to_record(), "qc": qc_summary.to_record()})
    _write_json(
        out_dir / "run_config.json",
        _effective_config(args, {"tsv": args.tsv, "audio_root": args.audio_root, "lang": args.lang, "silence_db": silence_db}),
    )
    _log("info", "ingest complete", rows=len(manifest), silent=qc_summary.silent, empty_labels=qc_summary.empty_labels)
    return 0


def cmd_plan(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    fraction = _pick(args.fraction, config, "fraction", 0.2)
    seed = _pick(args.seed, config, "seed", 0)
    tags = [t for t in (args.tags or "bs,gn,ps").split(",") if t]
    specs = _augmentation_specs(config)
    unknown = [t for t in tags if t not in specs]
    if unknown:
        raise ToolkitError(f"no augmentation spec for tag(s): {', '.join(unknown)}")

    plan = ExperimentPlan(
        augmentations={t: specs[t] for t in tags},
        fraction=fraction,
        seed=seed,
    )
    manifest, _ = ingest_tsv(args.manifest, Path(args.manifest).parent)
    datasets = build_plan(manifest, plan)

    out_dir = Path(args.out)
    payload = {
        "manifest": args.manifest,
        "language": manifest.language,
        "fraction": fraction,
        "seed": seed,
        "independent_draws": plan.independent_draws,
        "augmentations": {t: spec_to_record(s) for t, s in plan.augmentations.items()},
        "configs": [
            {"name": d.name, "tags": list(d.tags), "rows": d.size} for d in datasets
        ],
    }
    _write_json(out_dir / "plan.json", payload)
    _write_json(
        out_dir / "run_config.json",
        _effective_config(args, {"manifest": args.manifest, "fraction": fraction, "seed": seed, "tags": tags}),
    )
    for d in datasets:
        _log("info", "planned config", config=d.name, rows=d.size)
    return 0


def cmd_augment(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    workers = _pick(args.workers, config, "workers", 1)
    with open(args.plan, "r", encoding="utf-8") as fh:
        plan_doc = json.load(fh)

    manifest_path = Path(plan_doc["manifest"])
    if not manifest_path.is_absolute():
        manifest_path = Path(args.plan).parent / manifest_path
    manifest, _ = ingest_tsv(manifest_path, manifest_path.parent, language=plan_doc.get("language", ""))

    specs = {t: spec_from_record(rec) for t, rec in plan_doc["augmentations"].items()}
    plan = ExperimentPlan(
        augmentations=specs,
        fraction=plan_doc["fraction"],
        seed=plan_doc["seed"],
        independent_draws=bool(args.independent_draws or plan_doc.get("independent_draws", False)),
        configs=[(c["name"], tuple(c["tags"])) for c in plan_doc["configs"]],
    )
    datasets = build_plan(manifest, plan)
    wanted = {d.name for d in datasets} if args.config_name == "all" else {args.config_name}
    missing = wanted - {d.name for d in datasets}
    if missing:
        raise ToolkitError(f"plan has no config named: {', '.join(sorted(missing))}")

    out_dir = Path(args.out_dir)
    _write_json(
        out_dir / "run_config.json",
        _effective_config(
            args,
            {
                "plan": args.plan,
                "config": args.config_name,
                "workers": workers,
                "independent_draws": plan.independent_draws,
                "seed": plan.seed,
            },
        ),
    )
    for dataset in datasets:
        if dataset.name not in wanted:
            continue
        target = out_dir / dataset.name
        out_manifest, summary = materialize(
            dataset,
            specs,
            target,
            seed=plan.seed,
            audio_root=manifest_path.parent,
            workers=int(workers),
        )
        write_manifest(out_manifest, target / "manifest.tsv")
        _write_json(target / "materialize_summary.json", summary.to_record())
        _log(
            "info",
            "materialized config",
            config=dataset.name,
            rows=len(out_manifest),
            failures=len(summary.failures),
        )
    return 0


def cmd_normalize(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    norm = _norm_config(args, config)
    if args.manifest:
        manifest, _ = ingest_tsv(args.manifest, Path(args.manifest).parent)
        records = [replace(r, sentence=normalize(r.sentence, norm)) for r in manifest.records]
        out = Path(args.out) if args.out else Path(args.manifest).with_suffix(".normalized.tsv")
        write_manifest(Manifest(records, manifest.language, manifest.provenance), out)
        _log("info", "normalized manifest", rows=len(records), out=str(out))
    else:
        for line in sys.stdin:
            print(normalize(line.rstrip("\n"), norm))
    return 0


def _read_hypotheses(path: str) -> dict[str, str]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE)
        header = next(reader, None)
        if header is None or "source_id" not in header or "hypothesis" not in header:
            raise ToolkitError(f"{path} must be a TSV with source_id and hypothesis columns")
        sid, hyp = header.index("source_id"), header.index("hypothesis")
        out: dict[str, str] = {}
        for row in reader:
            if len(row) != len(header):
                continue
            out[row[sid]] = row[hyp]
    return out


def cmd_score(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    norm = _norm_config(args, config)
    manifest, _ = ingest_tsv(args.manifest, Path(args.manifest).parent)
    hyps = _read_hypotheses(args.hyp)

    pairs = []
    missing_hyp = 0
    for r in manifest.records:
        if r.source_id not in hyps:
            missing_hyp += 1
        pairs.append((r.source_id, r.sentence, hyps.get(r.source_id, "")))
    extra = sorted(set(hyps) - {r.source_id for r in manifest.records})

    report = score_corpus(pairs, norm)
    if args.json:
        doc = report.summary_record()
        doc["missing_hypotheses"] = missing_hyp
        doc["unmatched_hypotheses"] = len(extra)
        print(json.dumps(doc, ensure_ascii=False))
        if args.per_utt:
            print(report.to_jsonl())
    else:
        print(report.to_table(per_utterance=args.per_utt))
        if missing_hyp or extra:
            _log("warn", "hypothesis coverage", missing=missing_hyp, unmatched=len(extra))
    return 0


def _add_norm_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--remove-punctuation", action=argparse.BooleanOptionalAction, default=None)
    parser.add_argument("--remove-special-chars", action=argparse.BooleanOptionalAction, default=None)
    parser.add_argument("--strip-diacritics", action=argparse.BooleanOptionalAction, default=None,
                        help="strip Arabic diacritics before comparing")
    parser.add_argument("--lowercase", action=argparse.BooleanOptionalAction, default=None)
    parser.add_argument("--collapse-whitespace", action=argparse.BooleanOptionalAction, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="asrkit",
        description="Corpus preparation, augmentation, and WER/CER scoring for low-resource ASR.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="read a corpus TSV, run silence QC, write a toolkit manifest")
    p.add_argument("--tsv", required=True, help="input TSV with path and sentence columns")
    p.add_argument("--audio-root", required=True, help="directory audio paths are relative to")
    p.add_argument("--lang", default="", help="language tag recorded in the manifest")
    p.add_argument("--silence-db", type=float, default=None, help="silence threshold in dBFS (default -50)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", default=None, help="JSON run-config file (flags win)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("plan", help="generate the augmentation-combination experiment plan")
    p.add_argument("--manifest", required=True, help="toolkit manifest TSV")
    p.add_argument("--fraction", type=float, default=None, help="augmented fraction per tag (default 0.2)")
    p.add_argument("--seed", type=int, default=None, help="plan seed (default 0)")
    p.add_argument("--tags", default="bs,gn,ps", help="comma-separated augmentation tags")
    p.add_argument("--out", required=True, help="output directory for plan.json")
    p.add_argument("--config", default=None, help="JSON run-config file (flags win)")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("augment", help="materialize augmented WAVs and manifests for plan configs")
    p.add_argument("--plan", required=True, help="plan.json from the plan command")
    p.add_argument("--config", dest="config_name", default="all", metavar="NAME",
                   help="config name to materialize, or 'all'")
    p.add_argument("--workers", type=int, default=None, help="worker threads (output is identical for any N)")
    p.add_argument("--out-dir", required=True, help="output directory")
    p.add_argument("--independent-draws", action="store_true",
                   help="draw each config's subsets independently instead of sharing per-tag subsets")
    p.add_argument("--run-config", dest="config", default=None, help="JSON run-config file (flags win)")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("normalize", help="normalize a manifest's sentences, or stdin lines")
    p.add_argument("--manifest", default=None, help="toolkit manifest TSV (default: read stdin)")
    p.add_argument("--out", default=None, help="output manifest path")
    p.add_argument("--config", default=None, help="JSON run-config file (flags win)")
    _add_norm_flags(p)
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("score", help="score hypotheses against a reference manifest")
    p.add_argument("--manifest", required=True, help="reference manifest TSV")
    p.add_argument("--hyp", required=True, help="hypothesis TSV with source_id and hypothesis columns")
    p.add_argument("--per-utt", action="store_true", help="emit per-utterance scores")
    p.add_argument("--json", action="store_true", help="emit JSON instead of a table")
    p.add_argument("--config", default=None, help="JSON run-config file (flags win)")
    _add_norm_flags(p)
    p.set_defaults(func=cmd_score)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return 0 if exc.code == 0 else USAGE_ERROR
    try:
        return args.func(args)
    except (ToolkitError, OSError, json.JSONDecodeError, KeyError) as exc:
        _log("error", str(exc), error=type(exc).__name__)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
