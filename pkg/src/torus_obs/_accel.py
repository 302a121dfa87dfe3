"""Backend selection for the hot kernels.

Set ``TORUS_OBS_BACKEND=numpy`` to force the pure-numpy path; the default
is ``numba`` whenever numba imports cleanly.
"""

import os

_requested = os.environ.get("TORUS_OBS_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"TORUS_OBS_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

try:
    if _requested != "numba":
        raise ImportError
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


def jit(func):
    """``numba.njit(cache=True)`` when available, identity otherwise."""
    if HAVE_NUMBA:
        return _njit(cache=True)(func)
    return func
