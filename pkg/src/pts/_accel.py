"""Kernel dispatch between numba-compiled loops and plain numpy code.

Set ``PTS_DISABLE_NUMBA=1`` before import to force the numpy path everywhere.
Both implementations of every kernel are always importable so they can be
tested against each other.
"""
import os

_flag = os.environ.get("PTS_DISABLE_NUMBA", "").strip().lower()
DISABLED = _flag not in ("", "0", "false", "no")

try:
    import numba
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and not DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` with caching on, or a no-op decorator without numba."""
    kwargs.setdefault("cache", True)
    if not HAS_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn
    return numba.njit(*args, **kwargs)


def select(numba_impl, numpy_impl):
    return numba_impl if USE_NUMBA else numpy_impl


def backend():
    return "numba" if USE_NUMBA else "numpy"
