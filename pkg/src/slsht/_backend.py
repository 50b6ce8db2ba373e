"""Kernel backend selection.

Hot loops are written twice: a numba ``@njit`` kernel and a vectorised numpy
path.  The numba path is used when numba imports and ``SLSHT_DISABLE_NUMBA``
is unset (or ``0``).  ``set_backend`` switches at runtime, which the
benchmarks use to time both paths in one process.
"""

import os
from contextlib import contextmanager

try:
    import numba
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn


def _env_flag(name):
    return os.environ.get(name, "").strip().lower() not in ("", "0", "false", "no")


_state = {"numba": HAVE_NUMBA and not _env_flag("SLSHT_DISABLE_NUMBA")}


def use_numba():
    return _state["numba"]


def backend_name():
    return "numba" if _state["numba"] else "numpy"


def set_backend(name):
    """Select ``"numba"`` or ``"numpy"`` kernels for subsequent calls."""
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not importable")
    _state["numba"] = name == "numba"


@contextmanager
def backend(name):
    previous = backend_name()
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def configure_threads():
    """Apply ``SLSHT_THREADS`` (0 or unset means numba's default)."""
    raw = os.environ.get("SLSHT_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("SLSHT_THREADS must be >= 0")
    if HAVE_NUMBA and n > 0:
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    return n
