"""Compute-backend selection for the training kernels.

DYNAK_BACKEND=numba  force the compiled kernels (error if numba missing)
DYNAK_BACKEND=numpy  force the pure-numpy fallback
unset / auto         numba when importable, else numpy

The env var is read at every call so tests can flip backends freely.
"""

import os

from .errors import BackendError

_numba_module = None
_numpy_module = None


def _load_numba():
    global _numba_module
    if _numba_module is None:
        from . import _sgd_numba
        _numba_module = _sgd_numba
    return _numba_module


def _load_numpy():
    global _numpy_module
    if _numpy_module is None:
        from . import _sgd_numpy
        _numpy_module = _sgd_numpy
    return _numpy_module


def backend_name() -> str:
    """Resolve the active backend name without importing it."""
    choice = os.environ.get("DYNAK_BACKEND", "auto").strip().lower() or "auto"
    if choice not in ("auto", "numba", "numpy"):
        raise BackendError(f"DYNAK_BACKEND must be auto, numba or numpy, got {choice!r}")
    if choice == "auto":
        try:
            import numba  # noqa: F401
            return "numba"
        except ImportError:
            return "numpy"
    return choice


def get_backend():
    """Module exposing train_mf / train_hrm for the active backend."""
    name = backend_name()
    if name == "numba":
        try:
            return _load_numba()
        except ImportError as exc:
            if os.environ.get("DYNAK_BACKEND", "").strip().lower() == "numba":
                raise BackendError(f"numba backend requested but unavailable: {exc}") from exc
            return _load_numpy()
    return _load_numpy()
