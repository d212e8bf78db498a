"""Backend selection for the bitmask kernels.

Set ``ESSIMAGE_DISABLE_NUMBA=1`` to force the pure-numpy code path.
"""
import os
import warnings

DISABLE_ENV = "ESSIMAGE_DISABLE_NUMBA"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    numba = None

NUMBA_AVAILABLE = numba is not None
_disabled = os.environ.get(DISABLE_ENV, "").strip().lower() in {"1", "true", "yes", "on"}

if _disabled or not NUMBA_AVAILABLE:
    DEFAULT_BACKEND = "numpy"
    if not NUMBA_AVAILABLE and not _disabled:
        warnings.warn("numba could not be imported; falling back to numpy kernels")
else:
    DEFAULT_BACKEND = "numba"


def njit(func):
    if numba is None:
        return func
    return numba.njit(cache=True, nogil=True)(func)


def resolve(backend):
    backend = backend or DEFAULT_BACKEND
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not NUMBA_AVAILABLE:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend
