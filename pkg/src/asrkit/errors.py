"""Exception types shared across the toolkit.

Class names double as stable error codes: they cross the CLI boundary in
structured stderr records and surface unchanged through the bindings
package, so they carry no ``Error`` suffix.
"""


class ToolkitError(Exception):
    """Base class for all toolkit-specific failures."""


class UnsupportedFormat(ToolkitError):
    """Audio file is valid but uses a codec/layout we do not handle."""


class CorruptHeader(ToolkitError):
    """Audio file header is inconsistent with its payload."""


class InvalidSpec(ToolkitError):
    """A parameter record violates its documented constraints."""


class ClipTooShort(ToolkitError):
    """Clip has fewer samples than the transform's analysis window."""


class EmptyReference(ToolkitError):
    """Reference text is empty after normalization; error rate undefined."""


class MissingColumn(ToolkitError):
    """Manifest header lacks a required column."""


class EmptySplit(ToolkitError):
    """Requested split contains no records."""


class UnknownTag(ToolkitError):
    """Plan references an augmentation tag with no registered spec."""


class MaterializeFailed(ToolkitError):
    """Too many per-row failures while writing augmented audio."""
