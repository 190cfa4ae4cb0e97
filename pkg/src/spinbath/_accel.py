"""Numba availability and the environment switch that disables it.

Set ``SPINBATH_DISABLE_NUMBA=1`` before import to force the pure-numpy
kernels. Both paths are always importable so they can be compared.
"""

import os

_FLAG = "SPINBATH_DISABLE_NUMBA"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

NUMBA_AVAILABLE = numba is not None
NUMBA_DISABLED = os.environ.get(_FLAG, "").strip().lower() in ("1", "true", "yes", "on")
USE_NUMBA = NUMBA_AVAILABLE and not NUMBA_DISABLED


def jit(func):
    """Compile ``func`` in nopython mode, or return it unchanged without numba."""
    if numba is None:
        return func
    return numba.njit(cache=True, nogil=True)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
