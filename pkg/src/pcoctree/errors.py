"""Exception types shared across the toolkit.

Each class maps to one CLI exit status (see :mod:`pcoctree.cli`).
"""


class PcOctreeError(Exception):
    """Base class for all toolkit errors."""


class ParseError(PcOctreeError, ValueError):
    """Malformed input file. ``line`` is 1-based, or None when not line-specific."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.path = path

    def __str__(self) -> str:
        where = "".join(f"{part}:" for part in (self.path, self.line) if part is not None)
        return f"{where} {self.message}" if where else self.message


class EmptyCloudError(ParseError):
    """A point cloud with no points where at least one is required."""


class LevelError(PcOctreeError, ValueError):
    """Octree depth outside the permitted range."""


class IntegrityError(PcOctreeError):
    """Pipeline outputs that contradict each other."""
