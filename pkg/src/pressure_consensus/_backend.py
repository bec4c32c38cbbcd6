"""Backend selection for the hot loops.

Numba is used when importable unless ``PRESSURE_CONSENSUS_DISABLE_NUMBA`` is
set to a truthy value, in which case the pure-numpy fallbacks run instead.
The flag is read once at import time.
"""
import os

_FALSY = {"", "0", "false", "no", "off"}


def _numba_requested() -> bool:
    return os.environ.get("PRESSURE_CONSENSUS_DISABLE_NUMBA", "").strip().lower() in _FALSY


try:
    if not _numba_requested():
        raise ImportError("numba disabled by PRESSURE_CONSENSUS_DISABLE_NUMBA")
    from numba import njit
    NUMBA_ENABLED = True
except ImportError:
    njit = None
    NUMBA_ENABLED = False


def maybe_njit(func):
    """Compile ``func`` with numba when enabled, else return ``None``."""
    if not NUMBA_ENABLED:
        return None
    return njit(cache=True)(func)


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
