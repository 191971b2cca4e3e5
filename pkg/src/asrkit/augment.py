"""Seed-driven waveform augmentations: band-stop, noise injection, pitch shift.

Every transform is a pure function of (clip, spec, seed, source_id): parameter
draws come from a per-clip substream of a splittable RNG, so results never
depend on processing order or worker count.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.signal import lfilter

from .audio import AudioClip, resample_by_ratio
from .errors import ClipTooShort, InvalidSpec, UnknownTag

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class Rng:
    """Seeded RNG with per-clip substreams.

    A substream is a PCG64 generator keyed by BLAKE2b over the string keys,
    mixed with the base seed. Identical (seed, keys) always yield identical
    draws, on any worker, in any order.
    """

    seed: int

    def substream(self, *keys: str) -> np.random.Generator:
        digest = hashlib.blake2b("\x1f".join(keys).encode("utf-8"), digest_size=16).digest()
        words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
        return np.random.default_rng(np.random.SeedSequence([self.seed & _U64, *words]))


@dataclass(frozen=True)
class BandStopSpec:
    """Random notch: center and relative bandwidth drawn per clip.

    center_hz_range is bounded above by 4000 Hz (speech band ceiling);
    bandwidth_fraction is absolute bandwidth over center frequency, 0..2.
    steepness_db is the guaranteed minimum attenuation depth at the drawn
    center; the realized notch cascade is at least that deep.
    """

    center_hz_range: tuple[float, float] = (200.0, 4000.0)
    bandwidth_fraction_range: tuple[float, float] = (0.25, 1.0)
    steepness_db: float = 30.0
    sections: int = 2

    def __post_init__(self) -> None:
        lo, hi = self.center_hz_range
        if not (0.0 < lo <= hi <= 4000.0):
            raise InvalidSpec(f"center_hz_range must lie in (0, 4000], got {self.center_hz_range}")
        blo, bhi = self.bandwidth_fraction_range
        if not (0.0 <= blo <= bhi <= 2.0):
            raise InvalidSpec(
                f"bandwidth_fraction_range must lie in [0, 2], got {self.bandwidth_fraction_range}"
            )
        if self.steepness_db <= 0:
            raise InvalidSpec(f"steepness_db must be positive, got {self.steepness_db}")
        if self.sections < 1:
            raise InvalidSpec(f"sections must be >= 1, got {self.sections}")


@dataclass(frozen=True)
class NoiseSpec:
    """Per-sample multiplicative noise factor drawn uniformly from factor_range.

    symmetric=False reproduces the literal recipe (factors all positive);
    True negates each factor with probability 1/2.
    """

    factor_range: tuple[float, float] = (0.001, 0.03)
    symmetric: bool = False

    def __post_init__(self) -> None:
        lo, hi = self.factor_range
        if not (0.0 <= lo <= hi):
            raise InvalidSpec(f"factor_range must satisfy 0 <= lo <= hi, got {self.factor_range}")


@dataclass(frozen=True)
class PitchShiftSpec:
    """Duration-preserving pitch shift by a whole number of semitones."""

    semitone_range: tuple[int, int] = (-6, 6)
    fft_size: int = 2048
    hop: int = 512

    def __post_init__(self) -> None:
        lo, hi = self.semitone_range
        if lo > hi or lo < -12 or hi > 12:
            raise InvalidSpec(f"semitone_range must lie within [-12, 12], got {self.semitone_range}")
        if self.fft_size < 2 or self.fft_size & (self.fft_size - 1):
            raise InvalidSpec(f"fft_size must be a power of two, got {self.fft_size}")
        if self.hop <= 0 or self.fft_size % self.hop:
            raise InvalidSpec(f"hop must divide fft_size, got hop={self.hop} fft={self.fft_size}")


ParamSpec = Union[BandStopSpec, NoiseSpec, PitchShiftSpec]

KIND_BAND_STOP = "band_stop"
KIND_NOISE = "noise_inject"
KIND_PITCH = "pitch_shift"

_KIND_FOR_PARAMS = {
    BandStopSpec: KIND_BAND_STOP,
    NoiseSpec: KIND_NOISE,
    PitchShiftSpec: KIND_PITCH,
}
_CANONICAL_TAG = {KIND_BAND_STOP: "bs", KIND_NOISE: "gn", KIND_PITCH: "ps"}


@dataclass(frozen=True)
class AugmentationSpec:
    """One augmentation kind plus the short tag used in filenames and plans."""

    kind: str
    params: ParamSpec
    tag: str

    def __post_init__(self) -> None:
        expected = _KIND_FOR_PARAMS.get(type(self.params))
        if expected is None or expected != self.kind:
            raise InvalidSpec(f"kind {self.kind!r} does not match params {type(self.params).__name__}")
        if not self.tag:
            raise InvalidSpec("tag must be a non-empty string")


def default_augmentations() -> dict[str, AugmentationSpec]:
    """The three stock augmentations keyed by their canonical tags."""
    return {
        "bs": AugmentationSpec(KIND_BAND_STOP, BandStopSpec(), "bs"),
        "gn": AugmentationSpec(KIND_NOISE, NoiseSpec(), "gn"),
        "ps": AugmentationSpec(KIND_PITCH, PitchShiftSpec(), "ps"),
    }


def spec_to_record(spec: AugmentationSpec) -> dict:
    """Plain-dict form of a spec, round-trippable through spec_from_record."""
    rec: dict = {"kind": spec.kind, "tag": spec.tag}
    p = spec.params
    if isinstance(p, BandStopSpec):
        rec.update(
            center_hz_range=list(p.center_hz_range),
            bandwidth_fraction_range=list(p.bandwidth_fraction_range),
            steepness_db=p.steepness_db,
            sections=p.sections,
        )
    elif isinstance(p, NoiseSpec):
        rec.update(factor_range=list(p.factor_range), symmetric=p.symmetric)
    else:
        rec.update(semitone_range=list(p.semitone_range), fft_size=p.fft_size, hop=p.hop)
    return rec


def spec_from_record(rec: dict) -> AugmentationSpec:
    """Build an AugmentationSpec from its plain-dict form."""
    kind = rec.get("kind")
    if kind == KIND_BAND_STOP:
        params: ParamSpec = BandStopSpec(
            center_hz_range=tuple(rec.get("center_hz_range", BandStopSpec().center_hz_range)),
            bandwidth_fraction_range=tuple(
                rec.get("bandwidth_fraction_range", BandStopSpec().bandwidth_fraction_range)
            ),
            steepness_db=rec.get("steepness_db", 30.0),
            sections=rec.get("sections", 2),
        )
    elif kind == KIND_NOISE:
        params = NoiseSpec(
            factor_range=tuple(rec.get("factor_range", NoiseSpec().factor_range)),
            symmetric=rec.get("symmetric", False),
        )
    elif kind == KIND_PITCH:
        params = PitchShiftSpec(
            semitone_range=tuple(rec.get("semitone_range", PitchShiftSpec().semitone_range)),
            fft_size=rec.get("fft_size", 2048),
            hop=rec.get("hop", 512),
        )
    else:
        raise InvalidSpec(f"unknown augmentation kind {kind!r}")
    return AugmentationSpec(kind, params, rec.get("tag", _CANONICAL_TAG[kind]))


def _notch_coefficients(center_hz: float, bandwidth_hz: float, rate: int):
    """RBJ-style second-order notch: unity gain at DC/Nyquist, zero at center."""
    w0 = 2.0 * math.pi * center_hz / rate
    q = center_hz / bandwidth_hz
    alpha = math.sin(w0) / (2.0 * q)
    cos_w0 = math.cos(w0)
    b = np.array([1.0, -2.0 * cos_w0, 1.0])
    a = np.array([1.0 + alpha, -2.0 * cos_w0, 1.0 - alpha])
    return b / a[0], a / a[0]


def _band_stop(clip: AudioClip, spec: BandStopSpec, gen: np.random.Generator) -> AudioClip:
    nyquist = clip.sample_rate / 2.0
    if spec.center_hz_range[1] >= nyquist:
        raise InvalidSpec(
            f"notch center up to {spec.center_hz_range[1]} Hz >= Nyquist {nyquist} Hz"
        )
    center = float(gen.uniform(*spec.center_hz_range))
    fraction = float(gen.uniform(*spec.bandwidth_fraction_range))
    lo = max(center * (1.0 - fraction / 2.0), 1.0)
    hi = min(center * (1.0 + fraction / 2.0), 4000.0, nyquist * (1.0 - 1e-6))
    bandwidth = hi - lo
    if bandwidth <= 0.0:
        return AudioClip(clip.samples.copy(), clip.sample_rate, clip.source_id)
    b, a = _notch_coefficients(center, bandwidth, clip.sample_rate)
    y = clip.samples
    for _ in range(spec.sections):
        y = lfilter(b, a, y)
    return AudioClip(y, clip.sample_rate, clip.source_id)


def _noise_inject(clip: AudioClip, spec: NoiseSpec, gen: np.random.Generator) -> AudioClip:
    factors = gen.uniform(spec.factor_range[0], spec.factor_range[1], len(clip.samples))
    if spec.symmetric:
        factors = factors * (2 * gen.integers(0, 2, len(clip.samples)) - 1)
    # y = x + x*u, computed in factored form so degenerate ranges are bit-exact
    y = clip.samples * (1.0 + factors)
    return AudioClip(y, clip.sample_rate, clip.source_id)


def _princarg(phase: np.ndarray) -> np.ndarray:
    return (phase + math.pi) % (2.0 * math.pi) - math.pi


def _vocoder_stretch(x: np.ndarray, window_size: int, hop_ana: int, hop_syn: int) -> np.ndarray:
    """Phase-vocoder time stretch by hop_syn/hop_ana using Hann WOLA.

    Analysis frames step hop_ana, synthesis frames step hop_syn; each bin's
    synthesis phase advances by its instantaneous frequency estimated from
    successive analysis frames.
    """
    w = np.hanning(window_size)
    n_in = len(x)
    out_len = int(round(n_in * hop_syn / hop_ana))
    # enough frames that every output position gets full window overlap;
    # partial coverage at the tail would divide content by a vanishing
    # window sum and blow up noise-like signals
    n_frames = max(1, (out_len - 1) // hop_syn + 1)
    reach = (n_frames - 1) * hop_ana + window_size
    if reach > n_in:
        x = np.concatenate([x, np.zeros(reach - n_in)])

    bins = np.arange(window_size // 2 + 1)
    omega = 2.0 * math.pi * bins / window_size
    expected = omega * hop_ana

    out = np.zeros(out_len + window_size)
    norm = np.zeros(out_len + window_size)
    prev_phase = None
    syn_phase = None
    for m in range(n_frames):
        frame = np.fft.rfft(w * x[m * hop_ana : m * hop_ana + window_size])
        phase = np.angle(frame)
        if m == 0:
            spectrum = frame
            syn_phase = phase
        else:
            deviation = _princarg(phase - prev_phase - expected)
            true_freq = omega + deviation / hop_ana
            syn_phase = syn_phase + hop_syn * true_freq
            spectrum = np.abs(frame) * np.exp(1j * syn_phase)
        prev_phase = phase
        seg = w * np.fft.irfft(spectrum, n=window_size)
        pos = m * hop_syn
        out[pos : pos + window_size] += seg
        norm[pos : pos + window_size] += w * w

    out = out[:out_len] / np.where(norm[:out_len] > 1e-6, norm[:out_len], 1.0)
    return out


def _pitch_shift_by(clip: AudioClip, spec: PitchShiftSpec, semitones: int) -> AudioClip:
    if len(clip.samples) < spec.fft_size:
        raise ClipTooShort(
            f"pitch shift needs >= {spec.fft_size} samples, clip has {len(clip.samples)}"
        )
    ratio = 2.0 ** (semitones / 12.0)
    hop_syn = spec.hop
    hop_ana = max(1, round(hop_syn / ratio))
    stretched = _vocoder_stretch(clip.samples, spec.fft_size, hop_ana, hop_syn)
    y = resample_by_ratio(stretched, hop_ana, hop_syn)
    return AudioClip(y, clip.sample_rate, clip.source_id)


def _draw_semitones(spec: PitchShiftSpec, gen: np.random.Generator) -> int:
    lo, hi = spec.semitone_range
    candidates = [s for s in range(lo, hi + 1) if s != 0]
    if not candidates:
        raise InvalidSpec(f"semitone_range {spec.semitone_range} has no non-zero values")
    return candidates[int(gen.integers(0, len(candidates)))]


def band_stop(clip: AudioClip, spec: BandStopSpec, rng: Rng) -> AudioClip:
    """Notch out a randomly drawn band; draws keyed by (seed, source_id, "bs")."""
    return _band_stop(clip, spec, rng.substream(clip.source_id, "bs"))


def noise_inject(clip: AudioClip, spec: NoiseSpec, rng: Rng) -> AudioClip:
    """Add multiplicative uniform noise; draws keyed by (seed, source_id, "gn")."""
    return _noise_inject(clip, spec, rng.substream(clip.source_id, "gn"))


def pitch_shift(clip: AudioClip, spec: PitchShiftSpec, rng: Rng) -> AudioClip:
    """Shift pitch by a random non-zero semitone count, preserving duration.

    Implemented as a phase-vocoder time stretch by 2^(s/12) followed by
    rational resampling back, so output length stays within ~2% of input.
    """
    gen = rng.substream(clip.source_id, "ps")
    return _pitch_shift_by(clip, spec, _draw_semitones(spec, gen))


def apply(clip: AudioClip, spec: AugmentationSpec, rng: Rng) -> AudioClip:
    """Dispatch to the matching transform; deterministic in (seed, source_id, tag)."""
    gen = rng.substream(clip.source_id, spec.tag)
    if spec.kind == KIND_BAND_STOP:
        return _band_stop(clip, spec.params, gen)
    if spec.kind == KIND_NOISE:
        return _noise_inject(clip, spec.params, gen)
    if spec.kind == KIND_PITCH:
        return _pitch_shift_by(clip, spec.params, _draw_semitones(spec.params, gen))
    raise UnknownTag(f"no transform for kind {spec.kind!r}")
