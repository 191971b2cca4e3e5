"""Audio representation, PCM WAV I/O, sample-rate conversion, and silence QC.

All audio in the toolkit is a mono float sequence in nominal [-1, 1] plus a
sample rate. Files are RIFF/WAVE only: 8/16/24-bit integer PCM or 32-bit
float in, 16-bit PCM out.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from math import gcd
from pathlib import Path

import numpy as np
from scipy.signal import resample_poly

from .errors import CorruptHeader, InvalidSpec, UnsupportedFormat

DEFAULT_TARGET_RATE = 16000
DEFAULT_SILENCE_DB = -50.0

# Kaiser shape parameter for the resampler's anti-alias lowpass
# (~90 dB stopband, narrow transition).
KAISER_BETA = 8.6


@dataclass
class AudioClip:
    """Mono waveform: float64 samples, positive sample rate, opaque source id."""

    samples: np.ndarray
    sample_rate: int
    source_id: str = ""

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise UnsupportedFormat(f"clip must be mono 1-D, got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise InvalidSpec("clip contains non-finite samples")
        if int(self.sample_rate) <= 0:
            raise InvalidSpec(f"sample_rate must be positive, got {self.sample_rate}")
        self.samples = samples
        self.sample_rate = int(self.sample_rate)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate

    def with_source_id(self, source_id: str) -> "AudioClip":
        return AudioClip(self.samples, self.sample_rate, source_id)


@dataclass(frozen=True)
class ResampleSpec:
    """Target rate plus a quality knob: taps per polyphase branch."""

    target_rate: int = DEFAULT_TARGET_RATE
    filter_taps: int = 32

    def __post_init__(self) -> None:
        if self.target_rate <= 0:
            raise InvalidSpec(f"target_rate must be positive, got {self.target_rate}")
        if self.filter_taps < 16 or self.filter_taps % 2 != 0:
            raise InvalidSpec(f"filter_taps must be even and >= 16, got {self.filter_taps}")


_PCM = 0x0001
_IEEE_FLOAT = 0x0003
_EXTENSIBLE = 0xFFFE


def _read_chunks(data: bytes):
    """Yield (chunk_id, payload_offset, declared_size) for every RIFF chunk."""
    if len(data) < 12:
        raise CorruptHeader("file too small for a RIFF header")
    magic, riff_size, wave = struct.unpack_from("<4sI4s", data, 0)
    if magic != b"RIFF" or wave != b"WAVE":
        raise CorruptHeader("not a RIFF/WAVE file")
    if riff_size + 8 > len(data):
        raise CorruptHeader(
            f"RIFF size {riff_size} exceeds actual file payload {len(data) - 8}"
        )
    end = riff_size + 8
    pos = 12
    while pos + 8 <= end:
        cid, size = struct.unpack_from("<4sI", data, pos)
        pos += 8
        if pos + size > end:
            raise CorruptHeader(
                f"chunk {cid!r} declares {size} bytes but only {end - pos} remain"
            )
        yield cid, pos, size
        pos += size + (size & 1)  # chunks are word-aligned


def read_wav(path: str | Path) -> AudioClip:
    """Read a PCM WAV file as a mono clip at the file's native rate.

    Accepts 8/16/24-bit integer or 32-bit float payloads, 1 or 2 channels;
    stereo is downmixed by averaging, integer samples are scaled to [-1, 1].
    The source_id is the file stem.
    """
    path = Path(path)
    data = path.read_bytes()  # missing file raises FileNotFoundError

    fmt = None
    payload = None
    for cid, off, size in _read_chunks(data):
        if cid == b"fmt " and fmt is None:
            if size < 16:
                raise CorruptHeader(f"fmt chunk too small ({size} bytes)")
            fmt = struct.unpack_from("<HHIIHH", data, off)
        elif cid == b"data" and payload is None:
            payload = data[off : off + size]
    if fmt is None:
        raise CorruptHeader("missing fmt chunk")
    if payload is None:
        raise CorruptHeader("missing data chunk")

    audio_format, channels, rate, _byte_rate, block_align, bits = fmt
    if audio_format == _EXTENSIBLE:
        # sub-format GUID starts 24 bytes into the fmt payload
        for cid, off, size in _read_chunks(data):
            if cid == b"fmt ":
                if size < 26:
                    raise UnsupportedFormat("extensible fmt chunk without sub-format")
                audio_format = struct.unpack_from("<H", data, off + 24)[0]
                break
    if audio_format not in (_PCM, _IEEE_FLOAT):
        raise UnsupportedFormat(f"unsupported codec 0x{audio_format:04x} (PCM only)")
    if channels not in (1, 2):
        raise UnsupportedFormat(f"{channels} channels (mono/stereo only)")
    if rate <= 0:
        raise CorruptHeader(f"invalid sample rate {rate}")

    if audio_format == _IEEE_FLOAT:
        if bits != 32:
            raise UnsupportedFormat(f"{bits}-bit float (32-bit only)")
        samples = np.frombuffer(payload[: len(payload) // 4 * 4], dtype="<f4").astype(np.float64)
    elif bits == 16:
        samples = np.frombuffer(payload[: len(payload) // 2 * 2], dtype="<i2") / 32768.0
    elif bits == 8:
        samples = (np.frombuffer(payload, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    elif bits == 24:
        raw = np.frombuffer(payload[: len(payload) // 3 * 3], dtype=np.uint8).reshape(-1, 3)
        val = (
            raw[:, 0].astype(np.int64)
            | raw[:, 1].astype(np.int64) << 8
            | raw[:, 2].astype(np.int64) << 16
        )
        val = (val ^ 0x800000) - 0x800000
        samples = val / float(2**23)
    else:
        raise UnsupportedFormat(f"{bits}-bit integer PCM (8/16/24 only)")

    expected_align = channels * (bits // 8)
    if block_align not in (0, expected_align):
        raise CorruptHeader(f"block_align {block_align} != channels*bytes {expected_align}")
    if len(samples) % channels != 0:
        raise CorruptHeader("data chunk does not hold a whole number of frames")
    if channels == 2:
        samples = samples.reshape(-1, 2).mean(axis=1)

    return AudioClip(samples, rate, source_id=path.stem)


def write_wav(clip: AudioClip, path: str | Path) -> None:
    """Write a clip as mono 16-bit PCM, clamping samples to [-1, 1].

    Quantization is symmetric at 1/32768 so a read-back differs from the
    written samples by at most one 16-bit step.
    """
    x = np.clip(clip.samples, -1.0, 1.0)
    pcm = np.clip(np.round(x * 32768.0), -32768, 32767).astype("<i2")
    payload = pcm.tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(payload),
        b"WAVE",
        b"fmt ",
        16,
        _PCM,
        1,
        clip.sample_rate,
        clip.sample_rate * 2,
        2,
        16,
        b"data",
        len(payload),
    )
    Path(path).write_bytes(header + payload)


def _kaiser_sinc_lowpass(num_taps: int, cutoff: float) -> np.ndarray:
    """Windowed-sinc FIR lowpass, unit DC gain; cutoff as fraction of Nyquist."""
    n = np.arange(num_taps) - (num_taps - 1) / 2.0
    h = cutoff * np.sinc(cutoff * n) * np.kaiser(num_taps, KAISER_BETA)
    return h / h.sum()


def resample_by_ratio(samples: np.ndarray, up: int, down: int, filter_taps: int = 32) -> np.ndarray:
    """Rational-rate polyphase resampling with a Kaiser windowed-sinc filter."""
    g = gcd(up, down)
    up //= g
    down //= g
    if up == down:
        return np.array(samples, dtype=np.float64)
    max_rate = max(up, down)
    h = _kaiser_sinc_lowpass(filter_taps * max_rate + 1, 1.0 / max_rate)
    return resample_poly(np.asarray(samples, dtype=np.float64), up, down, window=h)


def resample(clip: AudioClip, spec: ResampleSpec = ResampleSpec()) -> AudioClip:
    """Convert a clip to spec.target_rate; identity when rates already match."""
    if clip.sample_rate == spec.target_rate:
        return AudioClip(clip.samples.copy(), clip.sample_rate, clip.source_id)
    out = resample_by_ratio(clip.samples, spec.target_rate, clip.sample_rate, spec.filter_taps)
    return AudioClip(out, spec.target_rate, clip.source_id)


def rms(clip: AudioClip) -> float:
    """Root-mean-square amplitude; 0 for an empty clip."""
    if len(clip.samples) == 0:
        return 0.0
    return float(np.sqrt(np.mean(clip.samples * clip.samples)))


def detect_silence(clip: AudioClip, threshold_db: float = DEFAULT_SILENCE_DB) -> bool:
    """True iff clip RMS level (dBFS, floored at -200 dB) is below threshold_db."""
    if threshold_db > 0:
        raise InvalidSpec(f"threshold_db is relative to full scale and must be <= 0, got {threshold_db}")
    level_db = 20.0 * math.log10(max(rms(clip), 1e-10))
    return level_db < threshold_db
