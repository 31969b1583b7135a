"""Kernel backend selection.

Set ``THRESHOLD_LAB_BACKEND=numpy`` to bypass numba entirely; the default is
``numba`` when it imports cleanly and ``numpy`` otherwise.
"""

import os

BACKEND_ENV = "THRESHOLD_LAB_BACKEND"

try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _njit = None
    HAVE_NUMBA = False


def requested_backend():
    value = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    if value not in ("numba", "numpy"):
        raise ValueError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {value!r}")
    if value == "numba" and not HAVE_NUMBA:
        return "numpy"
    return value


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, otherwise a no-op decorator.

    The numba kernels are always compiled lazily, so importing them costs
    nothing when the numpy backend is selected.
    """
    kwargs.setdefault("cache", True)
    if HAVE_NUMBA:
        return _njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]
    return lambda f: f
