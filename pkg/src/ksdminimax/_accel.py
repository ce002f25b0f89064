"""Numba acceleration switch.

Set ``KSDMINIMAX_DISABLE_NUMBA=1`` to force the pure-numpy kernels, e.g. on
platforms without numba or when debugging. The choice is fixed at import time.
"""

import os

_FLAG = "KSDMINIMAX_DISABLE_NUMBA"
_disabled = os.environ.get(_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None

if numba is not None and "NUMBA_THREADING_LAYER" not in os.environ:
    # OpenMP first: thread-safe for concurrent callers, and avoids a noisy
    # version probe of old TBB installs.
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]
USE_NUMBA = HAVE_NUMBA and not _disabled


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, otherwise the identity decorator."""
    if numba is None:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn
    return numba.njit(*args, **kwargs)


if numba is not None:
    prange = numba.prange
else:  # pragma: no cover
    prange = range


def set_threads(n):
    """Cap numba's worker pool; ``n <= 0`` restores the default (all cores)."""
    if numba is None:
        return
    limit = numba.config.NUMBA_NUM_THREADS
    numba.set_num_threads(limit if n <= 0 else min(int(n), limit))


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
