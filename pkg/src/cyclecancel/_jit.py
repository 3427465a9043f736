"""Optional numba acceleration.

Set ``CYCLECANCEL_DISABLE_JIT=1`` to force the pure-numpy/pure-python
kernels even when numba is importable.
"""

import os

_disabled = os.environ.get("CYCLECANCEL_DISABLE_JIT", "").strip().lower() in ("1", "true", "yes", "on")

try:
    from numba import njit as _numba_njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False
    _numba_njit = None

USE_JIT = NUMBA_AVAILABLE and not _disabled

numba_default = {
    "nogil": True,
    "cache": True,
    "fastmath": False,
    "boundscheck": False,
}


def njit(func):
    """Compile ``func`` with numba when available; otherwise return it unchanged.

    Compilation is lazy, so importing the package stays cheap even with numba
    installed. The undecorated function is always reachable as ``.py_func``.
    """
    if not NUMBA_AVAILABLE:
        func.py_func = func
        return func
    return _numba_njit(**numba_default)(func)
