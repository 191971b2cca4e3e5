"""Flat, record-based bindings to the asrkit core for training pipelines.

Five pure functions over plain data (float arrays, dicts, strings) so a
data-loading worker never touches toolkit classes. Audio crosses the
boundary as a contiguous float array plus a sample rate; conversion to the
core clip type is lossless for 32-bit float data and copy-free for
contiguous float64 input. Core errors propagate unchanged (exception class
names are the error codes, e.g. ``InvalidSpec``).
"""

from __future__ import annotations

import numpy as np

from asrkit import (
    AudioClip,
    NormalizationConfig,
    ResampleSpec,
    Rng,
    apply,
)
from asrkit import cer as _cer
from asrkit import normalize as _normalize
from asrkit import resample as _resample
from asrkit import spec_from_record
from asrkit import wer as _wer

__all__ = ["bound_apply", "bound_resample", "bound_normalize", "bound_wer", "bound_cer"]


def _as_clip(samples, rate: int, source_id: str = "") -> AudioClip:
    return AudioClip(np.ascontiguousarray(samples, dtype=np.float64), rate, source_id)


def bound_apply(samples, rate: int, spec: dict, seed: int, source_id: str) -> np.ndarray:
    """Apply one augmentation described by a plain spec record.

    The record carries ``kind`` (band_stop | noise_inject | pitch_shift),
    optional ``tag``, and the kind's parameters; outputs are bit-identical
    to the core/CLI path for the same (seed, source_id, tag).
    """
    clip = _as_clip(samples, rate, source_id)
    return apply(clip, spec_from_record(spec), Rng(seed)).samples


def bound_resample(samples, rate: int, target_rate: int, filter_taps: int = 32) -> np.ndarray:
    """Resample a float array to target_rate."""
    clip = _as_clip(samples, rate)
    return _resample(clip, ResampleSpec(target_rate=target_rate, filter_taps=filter_taps)).samples


def bound_normalize(text: str, config: dict | None = None) -> str:
    """Normalize a transcript; config mirrors NormalizationConfig fields."""
    return _normalize(text, NormalizationConfig.from_record(config))


def bound_wer(ref: str, hyp: str, config: dict | None = None) -> float:
    """Word error percentage, identical to the core scorer."""
    return _wer(ref, hyp, NormalizationConfig.from_record(config))


def bound_cer(ref: str, hyp: str, config: dict | None = None) -> float:
    """Character error percentage (spaces count), identical to the core scorer."""
    return _cer(ref, hyp, NormalizationConfig.from_record(config))
