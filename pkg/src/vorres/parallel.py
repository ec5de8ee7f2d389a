"""Replicate-level process parallelism.

Results are always reduced in input order and every task derives its own
random stream from an explicit index, so outputs are identical across
worker counts.  VORRES_THREADS caps the pool size (0 or unset = auto).
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

__all__ = ["worker_count", "parallel_map"]


def worker_count() -> int:
    raw = os.environ.get("VORRES_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return n


def parallel_map(fn, items, workers: int | None = None, chunksize: int = 1) -> list:
    """Ordered map over items, using a process pool when it pays off."""
    items = list(items)
    if workers is None:
        workers = worker_count()
    workers = min(workers, len(items)) if items else 1
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))
