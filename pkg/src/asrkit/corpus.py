"""Manifest ingestion, quality control, subset selection, experiment plans,
and materialization of augmented training sets.

A manifest is a TSV with at least ``path`` and ``sentence`` columns
(Common-Voice style); the toolkit writes manifests with columns
``source_id, path, sentence, split, tags``. Relative audio paths are
resolved against a caller-supplied audio root (for toolkit-written
manifests, the manifest's own directory).
"""

from __future__ import annotations

import csv
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .audio import (
    DEFAULT_SILENCE_DB,
    DEFAULT_TARGET_RATE,
    ResampleSpec,
    detect_silence,
    read_wav,
    resample,
    write_wav,
)
from .augment import AugmentationSpec, Rng, apply, default_augmentations
from .errors import EmptySplit, InvalidSpec, MaterializeFailed, MissingColumn, UnknownTag

SPLITS = ("train", "dev", "test")

FLAG_SILENT = "silent"
FLAG_EMPTY_LABEL = "empty_label"
FLAG_MISSING_AUDIO = "missing_audio"

MANIFEST_COLUMNS = ("source_id", "path", "sentence", "split", "tags")


@dataclass(frozen=True)
class ClipRecord:
    source_id: str
    audio_path: str
    sentence: str
    split: str = "train"
    duration_s: float | None = None
    flags: frozenset[str] = frozenset()
    tags: str = ""  # augmentation tag for materialized rows, "" for clean


@dataclass
class Manifest:
    records: list[ClipRecord] = field(default_factory=list)
    language: str = ""
    provenance: str = ""

    def __len__(self) -> int:
        return len(self.records)

    def split(self, name: str) -> list[ClipRecord]:
        return [r for r in self.records if r.split == name]

    def by_id(self) -> dict[str, ClipRecord]:
        return {r.source_id: r for r in self.records}


@dataclass
class IngestSummary:
    rows_read: int = 0
    rows_kept: int = 0
    malformed_rows: int = 0
    duplicate_rows: int = 0
    empty_labels: int = 0
    missing_audio: int = 0

    def to_record(self) -> dict:
        return dict(self.__dict__)


def ingest_tsv(
    path: str | Path,
    audio_root: str | Path,
    language: str = "",
    default_split: str = "train",
) -> tuple[Manifest, IngestSummary]:
    """Read a tab-separated corpus index into a Manifest.

    Requires ``path`` and ``sentence`` columns; ``source_id``, ``split`` and
    ``tags`` are honored when present, extra columns are ignored. Rows with
    the wrong field count (or duplicate ids/paths) are skipped and counted;
    rows whose audio file is absent under audio_root are kept but flagged.
    """
    path = Path(path)
    audio_root = Path(audio_root)
    summary = IngestSummary()
    records: list[ClipRecord] = []
    seen_ids: set[str] = set()
    seen_paths: set[str] = set()

    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumn(f"{path} is empty, expected a header row")
        cols = {name: i for i, name in enumerate(header)}
        missing = [c for c in ("path", "sentence") if c not in cols]
        if missing:
            raise MissingColumn(f"{path} lacks required column(s): {', '.join(missing)}")

        for row in reader:
            summary.rows_read += 1
            if len(row) != len(header):
                summary.malformed_rows += 1
                continue
            audio_path = row[cols["path"]]
            sentence = row[cols["sentence"]]
            source_id = row[cols["source_id"]] if "source_id" in cols else Path(audio_path).stem
            split = row[cols["split"]] if "split" in cols else default_split
            tags = row[cols["tags"]] if "tags" in cols else ""
            if split not in SPLITS:
                summary.malformed_rows += 1
                continue
            if source_id in seen_ids or audio_path in seen_paths:
                summary.duplicate_rows += 1
                continue
            flags = set()
            if not sentence.strip():
                flags.add(FLAG_EMPTY_LABEL)
                summary.empty_labels += 1
            if not (audio_root / audio_path).is_file():
                flags.add(FLAG_MISSING_AUDIO)
                summary.missing_audio += 1
            seen_ids.add(source_id)
            seen_paths.add(audio_path)
            records.append(
                ClipRecord(source_id, audio_path, sentence, split, flags=frozenset(flags), tags=tags)
            )
    summary.rows_kept = len(records)
    return Manifest(records, language=language, provenance=str(path)), summary


def _clean_field(value: str) -> str:
    # TSV fields must not contain the delimiter or record separators
    return value.replace("\t", " ").replace("\n", " ").replace("\r", " ")


def write_manifest(manifest: Manifest, path: str | Path) -> None:
    """Write the toolkit manifest schema; round-trips through ingest_tsv."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["\t".join(MANIFEST_COLUMNS)]
    for r in manifest.records:
        lines.append(
            "\t".join(
                _clean_field(v)
                for v in (r.source_id, r.audio_path, r.sentence, r.split, r.tags)
            )
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass
class QcSummary:
    checked: int = 0
    silent: int = 0
    empty_labels: int = 0
    missing_audio: int = 0
    read_errors: list[tuple[str, str]] = field(default_factory=list)

    def to_record(self) -> dict:
        rec = dict(self.__dict__)
        rec["read_errors"] = [{"source_id": s, "error": e} for s, e in self.read_errors]
        return rec


def qc(
    manifest: Manifest,
    threshold_db: float = DEFAULT_SILENCE_DB,
    audio_root: str | Path = ".",
) -> tuple[Manifest, QcSummary]:
    """Flag silent clips (and tally label/audio problems) without dropping rows."""
    audio_root = Path(audio_root)
    summary = QcSummary()
    records: list[ClipRecord] = []
    for r in manifest.records:
        flags = set(r.flags)
        duration = r.duration_s
        if FLAG_MISSING_AUDIO not in flags:
            try:
                clip = read_wav(audio_root / r.audio_path)
                duration = clip.duration_s
                summary.checked += 1
                if detect_silence(clip, threshold_db):
                    flags.add(FLAG_SILENT)
            except Exception as exc:  # per-row failures are recorded, not fatal
                summary.read_errors.append((r.source_id, type(exc).__name__))
        records.append(replace(r, flags=frozenset(flags), duration_s=duration))
    summary.silent = sum(FLAG_SILENT in r.flags for r in records)
    summary.empty_labels = sum(FLAG_EMPTY_LABEL in r.flags for r in records)
    summary.missing_audio = sum(FLAG_MISSING_AUDIO in r.flags for r in records)
    return Manifest(records, manifest.language, manifest.provenance), summary


def _round_half_up(x: float) -> int:
    return int(x + 0.5)


def select_subset(
    manifest: Manifest, split: str, fraction: float, seed: int, tag: str
) -> list[ClipRecord]:
    """Seeded sample (without replacement) of round(fraction*N) split rows.

    The shuffle is keyed by (seed, tag) only, so every config that includes a
    tag sees the same subset, and reruns are reproducible.
    """
    if not (0.0 < fraction <= 1.0):
        raise InvalidSpec(f"fraction must be in (0, 1], got {fraction}")
    records = manifest.split(split)
    if not records:
        raise EmptySplit(f"split {split!r} has no records")
    k = _round_half_up(fraction * len(records))
    gen = Rng(seed).substream("subset", tag)
    chosen = sorted(gen.permutation(len(records))[:k])
    return [records[i] for i in chosen]


@dataclass(frozen=True)
class AugmentedRow:
    tag: str
    record: ClipRecord

    @property
    def derived_id(self) -> str:
        return f"{self.record.source_id}#{self.tag}"


@dataclass
class PlannedDataset:
    """One training-set composition: all clean train rows + per-tag subsets."""

    name: str
    tags: tuple[str, ...]
    clean: list[ClipRecord]
    augmented: list[AugmentedRow]

    @property
    def size(self) -> int:
        return len(self.clean) + len(self.augmented)


def config_names(tags: list[str]) -> list[tuple[str, tuple[str, ...]]]:
    """Every subset of tags in deterministic order; empty set is `baseline`."""
    out: list[tuple[str, tuple[str, ...]]] = []
    for k in range(len(tags) + 1):
        for combo in itertools.combinations(tags, k):
            out.append(("+".join(combo) if combo else "baseline", combo))
    return out


@dataclass
class ExperimentPlan:
    """The augmentation-combination experiment: for 3 tags, 8 compositions
    (clean baseline, three singles, three pairs, one triple)."""

    augmentations: dict[str, AugmentationSpec] = field(default_factory=default_augmentations)
    fraction: float = 0.2
    seed: int = 0
    independent_draws: bool = False
    configs: list[tuple[str, tuple[str, ...]]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not (0.0 < self.fraction <= 1.0):
            raise InvalidSpec(f"fraction must be in (0, 1], got {self.fraction}")
        for tag, spec in self.augmentations.items():
            if tag != spec.tag:
                raise InvalidSpec(f"augmentation keyed {tag!r} carries tag {spec.tag!r}")
        if not self.configs:
            self.configs = config_names(list(self.augmentations))


def build_plan(manifest: Manifest, plan: ExperimentPlan) -> list[PlannedDataset]:
    """Expand a plan into concrete per-config row sets over the train split.

    With independent_draws the per-config subsets are re-drawn with the
    config name mixed into the RNG key; by default a tag's subset is shared
    by every config containing it, which keeps ablation comparisons
    controlled.
    """
    train = manifest.split("train")
    if not train:
        raise EmptySplit("train split is empty")
    datasets: list[PlannedDataset] = []
    for name, tags in plan.configs:
        rows: list[AugmentedRow] = []
        for tag in tags:
            if tag not in plan.augmentations:
                raise UnknownTag(f"config {name!r} references unknown tag {tag!r}")
            key = f"{name}|{tag}" if plan.independent_draws else tag
            subset = select_subset(manifest, "train", plan.fraction, plan.seed, key)
            rows.extend(AugmentedRow(tag, r) for r in subset)
        datasets.append(PlannedDataset(name, tags, list(train), rows))
    return datasets


@dataclass
class MaterializeSummary:
    config: str = ""
    clean_rows: int = 0
    augmented_rows: int = 0
    failures: list[tuple[str, str]] = field(default_factory=list)

    def to_record(self) -> dict:
        rec = dict(self.__dict__)
        rec["failures"] = [{"source_id": s, "error": e} for s, e in self.failures]
        return rec


def _safe_filename(derived_id: str) -> str:
    return "".join("_" if c in "/\\\0" else c for c in derived_id) + ".wav"


def materialize(
    planned: PlannedDataset,
    specs: dict[str, AugmentationSpec],
    out_dir: str | Path,
    seed: int,
    audio_root: str | Path = ".",
    workers: int = 1,
    failure_threshold: float = 0.1,
    target_rate: int = DEFAULT_TARGET_RATE,
) -> tuple[Manifest, MaterializeSummary]:
    """Write one config's augmented WAVs and return its combined manifest.

    Each augmented row is read, resampled to target_rate when needed,
    transformed with the RNG substream keyed by (seed, source_id, tag), and
    written as ``wavs/<source_id>#<tag>.wav``. Sentences are copied verbatim:
    augmentation never changes the label. Clean rows keep their original
    path strings. Rows fan out across ``workers`` threads; outputs are
    independent of worker count.
    """
    out_dir = Path(out_dir)
    audio_root = Path(audio_root)
    wav_dir = out_dir / "wavs"
    wav_dir.mkdir(parents=True, exist_ok=True)

    def _one(row: AugmentedRow) -> str:
        spec = specs[row.tag]
        clip = read_wav(audio_root / row.record.audio_path)
        clip = clip.with_source_id(row.record.source_id)
        if clip.sample_rate != target_rate:
            clip = resample(clip, ResampleSpec(target_rate=target_rate))
        out_clip = apply(clip, spec, Rng(seed))
        filename = _safe_filename(row.derived_id)
        write_wav(out_clip, wav_dir / filename)
        return f"wavs/{filename}"

    for row in planned.augmented:
        if row.tag not in specs:
            raise UnknownTag(f"no augmentation spec for tag {row.tag!r}")

    summary = MaterializeSummary(config=planned.name, clean_rows=len(planned.clean))
    results: dict[int, str] = {}
    if workers <= 1:
        outcomes = []
        for row in planned.augmented:
            try:
                outcomes.append(_one(row))
            except Exception as exc:
                outcomes.append(exc)
    else:
        def _guarded(row: AugmentedRow):
            try:
                return _one(row)
            except Exception as exc:
                return exc

        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_guarded, planned.augmented))

    for idx, outcome in enumerate(outcomes):
        if isinstance(outcome, Exception):
            summary.failures.append((planned.augmented[idx].derived_id, type(outcome).__name__))
        else:
            results[idx] = outcome

    if planned.augmented and len(summary.failures) > failure_threshold * len(planned.augmented):
        raise MaterializeFailed(
            f"{len(summary.failures)}/{len(planned.augmented)} augmented rows failed "
            f"(threshold {failure_threshold:.0%}); first: {summary.failures[:3]}"
        )

    records = [replace(r, tags="") for r in planned.clean]
    for idx, row in enumerate(planned.augmented):
        if idx not in results:
            continue
        records.append(
            ClipRecord(
                source_id=row.derived_id,
                audio_path=results[idx],
                sentence=row.record.sentence,
                split="train",
                flags=row.record.flags,
                tags=row.tag,
            )
        )
    summary.augmented_rows = len(records) - len(planned.clean)
    return Manifest(records, provenance=f"materialized:{planned.name}"), summary
