"""Thread-pool helpers; ``BACKUS_THREADS`` caps the worker count.

Work is split into fixed chunks whose results are concatenated in order, so
the output never depends on the number of threads.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from .errors import ConfigError


def worker_count() -> int:
    raw = os.environ.get("BACKUS_THREADS")
    if raw is None or raw == "":
        return max(1, min(8, os.cpu_count() or 1))
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"BACKUS_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"BACKUS_THREADS must be a positive integer, got {raw!r}")
    return n


def map_chunks(func: Callable[[np.ndarray], np.ndarray], points: np.ndarray, chunk: int = 128) -> np.ndarray:
    """``func`` applied to consecutive row blocks of ``points``, results concatenated."""
    points = np.asarray(points)
    if len(points) <= chunk:
        return np.asarray(func(points))
    blocks = [points[i:i + chunk] for i in range(0, len(points), chunk)]
    workers = min(worker_count(), len(blocks))
    if workers == 1:
        parts = [func(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(func, blocks))
    return np.concatenate([np.asarray(p) for p in parts])
