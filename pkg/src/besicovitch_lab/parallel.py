"""Deterministic work distribution.

Work items are split ahead of time and results are always combined in item
order, so numerical output is bit-identical for any worker count.  The worker
count defaults to the BESICOVITCH_LAB_THREADS environment variable (1 if
unset); the heavy kernels release the GIL inside numpy, so threads help.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

_ENV_VAR = "BESICOVITCH_LAB_THREADS"


def default_workers() -> int:
    try:
        n = int(os.environ.get(_ENV_VAR, "1"))
    except ValueError:
        n = 1
    return max(1, n)


def map_ordered(fn, items, workers=None):
    """Apply fn to each item; return results in item order."""
    items = list(items)
    n = default_workers() if workers is None else max(1, int(workers))
    if n == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
