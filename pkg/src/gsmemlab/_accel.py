"""Numba switch.

Kernels in :mod:`gsmemlab.kernels` are compiled with numba when it is
importable, unless ``GSMEMLAB_USE_NUMBA=0`` is set in the environment, in
which case the pure-numpy implementations are used instead.  The flag is
read once at import time.
"""

import os

_FLAG = os.environ.get("GSMEMLAB_USE_NUMBA", "1").strip().lower()

try:
    from numba import njit as _njit
    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    _njit = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and _FLAG not in ("0", "false", "no", "off")


def jit(func):
    """Compile ``func`` in nopython mode (cached), or return it untouched."""
    if _njit is None:
        return func
    return _njit(cache=True, nogil=True)(func)
