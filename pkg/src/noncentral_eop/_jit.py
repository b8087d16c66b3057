"""Select between numba-compiled kernels and the pure-numpy path.

Set ``NONCENTRAL_EOP_JIT=0`` to force the pure-numpy path even when numba
is importable. The flag is read once at import time.
"""
import os

_flag = os.environ.get("NONCENTRAL_EOP_JIT", "1").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - depends on environment
    numba = None

USE_NUMBA = numba is not None and _flag not in ("0", "false", "no", "off")


def jit(func):
    """``numba.njit(cache=True, nogil=True)`` when enabled, identity otherwise."""
    if USE_NUMBA:
        return numba.njit(cache=True, nogil=True)(func)
    return func


def backend():
    return "numba" if USE_NUMBA else "numpy"
