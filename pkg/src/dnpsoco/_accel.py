"""Backend selection for the compiled kernels.

Set ``DNPSOCO_DISABLE_NUMBA=1`` to force the pure Python/numpy path. The flag
is read once, at import time.
"""

import os

_DISABLED = os.environ.get("DNPSOCO_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError("numba disabled by DNPSOCO_DISABLE_NUMBA")
    from numba import njit as _njit

    USE_NUMBA = True
except ImportError:
    _njit = None
    USE_NUMBA = False

BACKEND = "numba" if USE_NUMBA else "python"


def jit(func):
    """``numba.njit(cache=True)`` when available, identity otherwise."""
    if USE_NUMBA:
        return _njit(cache=True)(func)
    return func
