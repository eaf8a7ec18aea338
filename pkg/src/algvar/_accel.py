"""Backend selection for the numeric kernels.

``ALGVAR_KERNELS=numpy`` forces the pure-numpy path; ``numba`` (the default
when numba imports) compiles the loops with ``@njit``.
"""

import os

BACKEND_ENV = "ALGVAR_KERNELS"

try:
    from numba import njit as _numba_njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba ships with the dev environment
    _numba_njit = None
    HAVE_NUMBA = False


def requested_backend():
    choice = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    if choice not in ("numba", "numpy"):
        raise ValueError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {choice!r}")
    if choice == "numba" and not HAVE_NUMBA:
        return "numpy"
    return choice


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise a no-op decorator."""
    if HAVE_NUMBA:
        return _numba_njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrapper(f):
        return f

    return wrapper
