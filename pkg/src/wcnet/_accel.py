"""Numba switch shared by the kernel module.

Set ``WCNET_DISABLE_NUMBA=1`` to force the pure-numpy code paths.
"""

import os

NUMBA_OPTS = {"cache": True, "nogil": True}

_disabled = os.environ.get("WCNET_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _disabled:
        raise ImportError("disabled by WCNET_DISABLE_NUMBA")
    import numba

    HAS_NUMBA = True
except ImportError:
    numba = None
    HAS_NUMBA = False


def njit(func):
    """Compile ``func`` with numba when available, otherwise return it as is."""
    if not HAS_NUMBA:
        return func
    return numba.njit(func, **NUMBA_OPTS)
