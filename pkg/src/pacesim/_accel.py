"""Numba acceleration switch.

Hot loops are written once as plain Python and jitted at import time unless
the environment variable PACESIM_NO_NUMBA is set to 1/true/yes (or numba is
not importable), in which case the pure-Python/numpy path runs instead.
Both paths are exposed so the benchmark can compare them in one process.
"""

import os

_FLAG = os.environ.get("PACESIM_NO_NUMBA", "0").strip().lower()
NUMBA_REQUESTED = _FLAG not in ("1", "true", "yes")

if NUMBA_REQUESTED:
    try:
        from numba import njit as _njit

        NUMBA_ACTIVE = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ACTIVE = False
else:
    NUMBA_ACTIVE = False


def maybe_jit(fn):
    """Return an njit-compiled version of fn, or fn itself when disabled."""
    if NUMBA_ACTIVE:
        return _njit(cache=True)(fn)
    return fn
