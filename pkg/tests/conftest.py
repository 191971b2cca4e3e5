import numpy as np
import pytest

from asrkit import AudioClip


def make_sine(freq: float, rate: int = 16000, duration: float = 1.0, amp: float = 0.8,
              source_id: str = "sine") -> AudioClip:
    t = np.arange(int(round(duration * rate))) / rate
    return AudioClip(amp * np.sin(2 * np.pi * freq * t), rate, source_id)


def dominant_freq(x: np.ndarray, rate: int) -> float:
    """FFT-peak frequency with parabolic interpolation (measurement oracle)."""
    w = np.hanning(len(x))
    spectrum = np.abs(np.fft.rfft(x * w))
    k = int(np.argmax(spectrum))
    if 0 < k < len(spectrum) - 1:
        a, b, c = np.log(spectrum[k - 1 : k + 2] + 1e-30)
        delta = 0.5 * (a - c) / (a - 2 * b + c)
    else:
        delta = 0.0
    return (k + delta) * rate / len(x)


def tone_bin_amplitude(x: np.ndarray, freq: float, rate: int) -> float:
    """Peak FFT magnitude in a small neighborhood of the given frequency."""
    spectrum = np.abs(np.fft.rfft(x * np.hanning(len(x))))
    k = int(round(freq * len(x) / rate))
    return float(spectrum[max(0, k - 2) : k + 3].max())


def brute_levenshtein(a, b) -> int:
    """Independent two-row DP for minimal edit cost (oracle; no backtrace)."""
    prev = list(range(len(b) + 1))
    for i, ai in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j, bj in enumerate(b, start=1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ai != bj))
        prev = cur
    return prev[-1]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
