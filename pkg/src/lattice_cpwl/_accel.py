"""Backend selection for the hot kernels.

Set ``LATTICE_CPWL_BACKEND=numpy`` to force the pure-numpy code paths; the
default is ``numba`` whenever numba imports cleanly.  ``LATTICE_CPWL_THREADS``
caps the numba worker pool.
"""

from __future__ import annotations

import os

BACKEND_ENV = "LATTICE_CPWL_BACKEND"
THREADS_ENV = "LATTICE_CPWL_THREADS"

# TBB in this image is too old for numba; skip the probe (and its warning)
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    numba = None
    HAVE_NUMBA = False


def requested_backend() -> str:
    name = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    if name not in ("numba", "numpy"):
        raise ValueError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        return "numpy"
    return name


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if HAVE_NUMBA:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)

    def wrap(fn):
        return fn

    if args and callable(args[0]):
        return args[0]
    return wrap


if HAVE_NUMBA:
    prange = numba.prange
else:  # pragma: no cover
    prange = range


def set_threads(n: int | None) -> None:
    """Cap numba's worker pool.  ``None`` reads ``LATTICE_CPWL_THREADS``."""
    if n is None:
        env = os.environ.get(THREADS_ENV)
        if not env:
            return
        n = int(env)
    if n < 1:
        raise ValueError("thread count must be >= 1")
    if HAVE_NUMBA:
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
