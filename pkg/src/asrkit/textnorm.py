"""Transcript normalization: punctuation/symbol removal, Arabic diacritics,
case folding, and whitespace collapsing.

The pipeline is fixed-order (NFC, diacritics strip, punctuation/symbol
removal, lowercase, whitespace collapse) and idempotent for every flag
combination.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass

# Arabic diacritical marks treated as strippable, in code-point listing order:
# fathatan, dammatan, kasratan, fatha, damma, kasra, shadda, sukun
# (U+064B..U+0652), superscript alef (U+0670), maddah, hamza above, hamza
# below (U+0653..U+0655). All are combining marks.
ARABIC_DIACRITICS: tuple[str, ...] = (
    "ً",
    "ٌ",
    "ٍ",
    "َ",
    "ُ",
    "ِ",
    "ّ",
    "ْ",
    "ٰ",
    "ٓ",
    "ٔ",
    "ٕ",
)

_DIACRITICS_SET = frozenset(ARABIC_DIACRITICS)

# Apostrophes kept when they sit between two word characters (contractions).
_APOSTROPHES = frozenset({"'", "’"})


@dataclass(frozen=True)
class NormalizationConfig:
    remove_punctuation: bool = True
    remove_special_chars: bool = True
    strip_arabic_diacritics: bool = False
    lowercase: bool = True
    collapse_whitespace: bool = True

    def to_record(self) -> dict:
        return {
            "remove_punctuation": self.remove_punctuation,
            "remove_special_chars": self.remove_special_chars,
            "strip_arabic_diacritics": self.strip_arabic_diacritics,
            "lowercase": self.lowercase,
            "collapse_whitespace": self.collapse_whitespace,
        }

    @classmethod
    def from_record(cls, rec: dict | None) -> "NormalizationConfig":
        if rec is None:
            return cls()
        return cls(**{k: bool(v) for k, v in rec.items()})


DEFAULT_CONFIG = NormalizationConfig()


def strip_diacritics(text: str) -> str:
    """Remove the Arabic diacritics table from text.

    Works on the canonical decomposition so precomposed hamza/madda letters
    (e.g. U+0623 = alef + hamza-above) collapse to their bare base letter;
    the result is recomposed to NFC.
    """
    decomposed = unicodedata.normalize("NFD", text)
    kept = "".join(ch for ch in decomposed if ch not in _DIACRITICS_SET)
    return unicodedata.normalize("NFC", kept)


def _remove_marks(text: str, punctuation: bool, symbols: bool) -> str:
    out = []
    n = len(text)
    for i, ch in enumerate(text):
        cat = unicodedata.category(ch)
        drop = (punctuation and cat.startswith("P")) or (symbols and cat.startswith("S"))
        if drop and ch in _APOSTROPHES:
            prev_ok = i > 0 and text[i - 1].isalnum()
            next_ok = i + 1 < n and text[i + 1].isalnum()
            if prev_ok and next_ok:
                drop = False
        if not drop:
            out.append(ch)
    return "".join(out)


def _lower(text: str) -> str:
    # Per-char lowering keeps code-point count non-increasing: the one
    # expanding case, dotted capital I (U+0130), folds to plain "i".
    return "".join("i" if ch == "İ" else ch.lower() for ch in text)


def normalize(text: str, config: NormalizationConfig = DEFAULT_CONFIG) -> str:
    """Normalize a transcript for scoring or corpus preparation."""
    s = unicodedata.normalize("NFC", text)
    if config.strip_arabic_diacritics:
        s = strip_diacritics(s)
    if config.remove_punctuation or config.remove_special_chars:
        s = _remove_marks(s, config.remove_punctuation, config.remove_special_chars)
    if config.lowercase:
        s = _lower(s)
    if config.collapse_whitespace:
        s = " ".join(s.split())
    return s


def diacritic_density(text: str) -> float:
    """Fraction of code points (of the raw input) that are Arabic diacritics."""
    if not text:
        return 0.0
    return sum(ch in _DIACRITICS_SET for ch in text) / len(text)
