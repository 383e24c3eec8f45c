"""Optional numba acceleration.

Kernels are written in the numpy subset numba understands and wrapped
with :func:`jit`.  Setting ``PINDEX_DISABLE_NUMBA=1`` (or running without
numba installed) leaves them as plain Python/numpy functions, which is
slower but numerically equivalent.
"""

from __future__ import annotations

import os

_FLAG = os.environ.get("PINDEX_DISABLE_NUMBA", "").strip().lower()
DISABLED_BY_ENV = _FLAG in {"1", "true", "yes", "on"}

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

NUMBA_ENABLED = numba is not None and not DISABLED_BY_ENV


def jit(fn):
    """Compile ``fn`` in nopython mode when numba is enabled."""
    if not NUMBA_ENABLED:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
