"""Optional numba acceleration.

Kernels are plain Python functions decorated with :func:`maybe_njit`. When numba
is importable and ``AYO_NUMBA`` is not set to ``0`` they are compiled; otherwise
they run as ordinary Python and the endgame solver switches to its vectorised
numpy path.
"""

from __future__ import annotations

import os

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("AYO_NUMBA", "1").strip().lower() not in (
    "0",
    "false",
    "off",
    "no",
)


def maybe_njit(*args, **kwargs):
    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)

    def decorator(func):
        if USE_NUMBA:
            return njit(*args, **kwargs)(func)
        return func

    return decorator


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
