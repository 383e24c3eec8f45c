"""Exception hierarchy.

Every error carries a ``category`` string that the command line surfaces
in its machine-readable error payload.
"""

from __future__ import annotations


class PindexError(Exception):
    category = "error"


class DataError(PindexError, ValueError):
    """Malformed, non-finite or inconsistent input data."""

    category = "data"


class ParameterError(PindexError, ValueError):
    """Invalid configuration or argument values."""

    category = "parameter"


class SelectionError(PindexError, RuntimeError):
    category = "selection"


class PiError(PindexError, RuntimeError):
    """The parametricness index cannot be formed for this selection."""

    category = "pi"


class StudyError(PindexError, RuntimeError):
    category = "study"
