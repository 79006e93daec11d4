"""errors.py

Exception hierarchy of the engine.

Every error derives from :class:`IgfError` so the CLI can catch the whole
family in one place, and from the builtin it specialises (``ValueError``,
``RuntimeError``) so callers that only know the builtins still work.
"""

from __future__ import annotations


class IgfError(Exception):
    """Base class of every error raised by the engine."""


class DatasetError(IgfError, ValueError):
    """Rejected dataset row, schema or lookup."""


class ConstraintError(IgfError, ValueError):
    """Malformed diversity bound table or generation parameters."""


class ModelError(IgfError, ValueError):
    """The integer program cannot be built or is malformed."""


class SolverError(IgfError, RuntimeError):
    """Numerical failure inside the LP relaxation."""


class InstanceTooLarge(IgfError, ValueError):
    """The brute-force oracle would exceed its enumeration budget."""


class InfeasibleError(IgfError):
    """The diversity constraints admit no ranking at all."""

    def __init__(self, message: str, diagnosis: list[dict] | None = None) -> None:
        super().__init__(message)
        self.diagnosis = diagnosis or []
