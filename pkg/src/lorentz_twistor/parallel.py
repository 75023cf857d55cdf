"""Chunked evaluation over sample arrays, capped by the LSL_THREADS variable."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np


def max_workers() -> int:
    raw = os.environ.get("LSL_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


def map_chunks(fn: Callable[[np.ndarray], dict], points: np.ndarray, chunk: int = 1024) -> dict:
    """Apply ``fn`` to row chunks of ``points`` and concatenate the array outputs.

    Results are reassembled in input order, so they do not depend on the
    number of threads.
    """
    n = len(points)
    if n <= chunk or max_workers() == 1:
        return fn(points)
    pieces = [points[i:i + chunk] for i in range(0, n, chunk)]
    with ThreadPoolExecutor(max_workers=max_workers()) as pool:
        outs = list(pool.map(fn, pieces))
    return {k: np.concatenate([o[k] for o in outs], axis=0) for k in outs[0]}
