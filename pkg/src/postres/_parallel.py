"""Chunked thread-pool mapping with ordered, deterministic assembly."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

WORKERS_ENV = "POSTRES_WORKERS"


def worker_count(workers: int | None = None) -> int:
    if workers is None:
        raw = os.environ.get(WORKERS_ENV)
        if raw:
            try:
                workers = int(raw)
            except ValueError:
                raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
        else:
            workers = min(4, os.cpu_count() or 1)
    return max(1, int(workers))


def map_chunks(fn, n: int, workers: int | None = None, axis: int = 0):
    """Evaluate ``fn(slice)`` over contiguous chunks of ``range(n)`` and concatenate.

    Results are joined in chunk order, so the output does not depend on the
    number of workers.
    """
    workers = worker_count(workers)
    if workers == 1 or n < 2:
        return fn(slice(0, n))
    bounds = np.linspace(0, n, min(workers, n) + 1).astype(int)
    slices = [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:])]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(fn, slices))
    return np.concatenate(parts, axis=axis)
