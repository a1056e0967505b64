"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations

from typing import Optional


class WikiEDError(Exception):
    """Base class for all errors raised by wikied."""


class InputError(WikiEDError):
    """Caller supplied malformed input (bad file, bad span, bad config)."""


class DumpParseError(InputError):
    """A dump stream violates the line grammar."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConflictError(InputError):
    """Records are individually valid but inconsistent with each other."""


class CorpusError(InputError):
    """A corpus file cannot be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SnapshotError(WikiEDError):
    """Snapshot cannot be written or read."""


class SnapshotCorruptError(SnapshotError):
    """Snapshot file is truncated, tampered with, or structurally invalid."""


class SnapshotVersionError(SnapshotError):
    """Snapshot was written with an unsupported format version."""


class ContractError(WikiEDError, ValueError):
    """An operation was called outside its precondition."""
