"""Numba/numpy backend selection and worker-count handling.

Hot kernels live in :mod:`normlens._kernels` in two variants: a numba
``@njit`` implementation and a pure-numpy fallback.  The active variant is
chosen once per process:

* ``NORMLENS_NO_NUMBA=1`` forces the numpy fallback,
* otherwise numba is used when it imports cleanly.

``NORMLENS_THREADS`` caps the worker count used for chunked work
(``0`` or unset means auto).  Results never depend on the worker count:
work is partitioned into fixed-size chunks and reduced in chunk order.
"""

import os
from concurrent.futures import ThreadPoolExecutor

_ENV_NO_NUMBA = "NORMLENS_NO_NUMBA"
_ENV_THREADS = "NORMLENS_THREADS"


def numba_enabled() -> bool:
    """True when the numba code paths should be used."""
    if os.environ.get(_ENV_NO_NUMBA, "").strip() not in ("", "0"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def active_backend() -> str:
    """Name of the active kernel backend, ``"numba"`` or ``"numpy"``."""
    return "numba" if numba_enabled() else "numpy"


def worker_count() -> int:
    """Worker count for chunked work, honoring ``NORMLENS_THREADS``."""
    raw = os.environ.get(_ENV_THREADS, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"{_ENV_THREADS} must be an integer, got {raw!r}") from exc
    if n < 0:
        raise ValueError(f"{_ENV_THREADS} must be >= 0, got {n}")
    if n == 0:
        n = min(os.cpu_count() or 1, 8)
    return max(n, 1)


def map_ordered(fn, items):
    """Apply ``fn`` over ``items``, returning results in input order.

    Runs on a thread pool when more than one worker is configured; the
    output list is ordered by input index either way, so callers see the
    same reduction order regardless of the worker count.
    """
    items = list(items)
    workers = worker_count()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
