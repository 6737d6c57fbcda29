"""Compute backend selection.

Hot loops exist twice: once as numba ``@njit`` kernels and once as plain
vectorized numpy. The active path is chosen by the ``LINBOLTZ_BACKEND``
environment variable (``numba`` or ``numpy``) and can be switched at run
time with :func:`set_backend` or the :func:`use_backend` context manager.
If numba cannot be imported the numpy path is used regardless.
"""

from __future__ import annotations

import contextlib
import os

BACKEND_ENV = "LINBOLTZ_BACKEND"
THREADS_ENV = "LINBOLTZ_THREADS"
DEBUG_ENV = "LINBOLTZ_DEBUG"

_VALID = ("numba", "numpy")

try:
    import numba as _numba

    # prefer OpenMP; probing an outdated TBB only produces a warning
    _numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None
    HAVE_NUMBA = False


def _from_env() -> str:
    name = os.environ.get(BACKEND_ENV, "numba").strip().lower() or "numba"
    if name not in _VALID:
        raise ValueError(f"{BACKEND_ENV} must be one of {_VALID}, got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        return "numpy"
    return name


_state = {"backend": _from_env()}


def get_backend() -> str:
    """Name of the active backend."""
    return _state["backend"]


def set_backend(name: str) -> None:
    name = name.strip().lower()
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not importable")
    _state["backend"] = name


@contextlib.contextmanager
def use_backend(name: str):
    """Temporarily switch the backend."""
    old = get_backend()
    set_backend(name)
    try:
        yield
    finally:
        _state["backend"] = old


def debug_enabled() -> bool:
    return os.environ.get(DEBUG_ENV, "").strip() not in ("", "0", "false", "no")


def set_threads(n: int | None) -> int:
    """Cap the numba worker count; returns the count in effect."""
    if not HAVE_NUMBA:
        return 1
    if n is None:
        env = os.environ.get(THREADS_ENV, "").strip()
        n = int(env) if env else _numba.config.NUMBA_NUM_THREADS
    n = max(1, min(int(n), _numba.config.NUMBA_NUM_THREADS))
    _numba.set_num_threads(n)
    return n


if HAVE_NUMBA:

    def njit(*args, **kwargs):
        kwargs.setdefault("cache", True)
        kwargs.setdefault("fastmath", False)
        return _numba.njit(*args, **kwargs)

    prange = _numba.prange
else:  # pragma: no cover

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f

    prange = range
