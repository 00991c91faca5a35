"""Structured errors raised across the package.

Every reader/validator failure maps to one of these so callers (and the CLI)
can report what went wrong without parsing message strings.
"""


class GhostError(Exception):
    """Base class for all errors raised by this package."""


class InvalidConfig(GhostError):
    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"invalid config field '{field}': {reason}")


class InvalidParams(GhostError):
    """Synthetic-sequence parameters violate their invariants."""


class ZeroVector(GhostError):
    """Cosine distance is undefined for (near-)zero vectors."""


class EmptyGallery(GhostError):
    """A proxy computation was asked for a track with no stored embeddings."""


class MissingEmaState(GhostError):
    """EMA proxy requested without a previous state or any gallery vector."""


class DimensionMismatch(GhostError):
    """Feature vectors or renormalization parameters disagree on dimension."""


class MissingEmbedding(GhostError):
    """Appearance cue is enabled but a detection or track has no embedding."""


class SingularInnovation(GhostError):
    """Kalman innovation covariance is not invertible (degenerate noise)."""


class OutOfOrderFrame(GhostError):
    """Tracker was stepped with a frame index not greater than the last one."""


class IoError(GhostError):
    """Wrapper for file-level read/write failures."""


class ParseError(GhostError):
    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class BadMagic(GhostError):
    """Binary file does not start with the expected magic bytes."""


class VersionUnsupported(GhostError):
    pass


class DuplicateRecord(GhostError):
    """Two embedding records share the same (frame, source_index) key."""


class TruncatedFile(GhostError):
    pass


class MissingKey(GhostError):
    def __init__(self, key: str):
        self.key = key
        super().__init__(f"missing required key '{key}'")


class UnknownKey(GhostError):
    def __init__(self, key: str):
        self.key = key
        super().__init__(f"unknown config key '{key}'")


class ConfigValueError(GhostError):
    def __init__(self, key: str, reason: str):
        self.key = key
        self.reason = reason
        super().__init__(f"bad value for '{key}': {reason}")


class MissingTrackIds(GhostError):
    """Association diagnostics need result rows that carry track ids."""


class EmptyHistogram(GhostError):
    pass
