"""Exception hierarchy.

Every ``CastkitError`` is a contract violation by the caller (bad shapes,
missing resources, inconsistent counts). The CLI maps these to exit code 2.
"""

from __future__ import annotations


class CastkitError(Exception):
    """Base class for caller-side contract errors."""


class ShapeError(CastkitError, ValueError):
    """Inputs have incompatible or unsupported dimensions."""


class EmptyDatasetError(CastkitError, ValueError):
    """An operation received no views/frames to work on."""


class EmptyObjectError(CastkitError, ValueError):
    """A mask lifted to zero valid 3D points."""


class BoundsError(CastkitError, ValueError):
    """A count parameter falls outside the admissible range."""


class TableLookupError(CastkitError, KeyError):
    """A precomputed perceptual-distance table has no entry for a frame."""

    def __init__(self, frame: int, path: str | None = None):
        self.frame = frame
        self.path = path
        where = f" in {path}" if path else ""
        super().__init__(f"no perceptual distance for frame {frame}{where}")

    def __str__(self) -> str:
        return self.args[0]


class ConfigError(CastkitError, ValueError):
    """Configuration is malformed or contains unknown keys."""


class ManifestError(CastkitError, ValueError):
    """A stage manifest is missing, corrupt, or fails schema validation."""
