"""Worker-pool helpers and float formatting shared by the CLI and experiments."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

_worker_count = 1


def set_worker_count(n: int | None) -> int:
    """Set the worker count for grid evaluations (env ULAMFLOAT_THREADS wins)."""
    global _worker_count
    env = os.environ.get("ULAMFLOAT_THREADS")
    if env is not None:
        n = int(env)
    if n is None or n <= 0:
        n = os.cpu_count() or 1
    _worker_count = max(1, int(n))
    return _worker_count


def worker_count() -> int:
    return _worker_count


def parallel_map(fn, items):
    """Map preserving input order; threads are used only when configured.

    Results are merged by index regardless of completion order, so output is
    deterministic for pure ``fn``.
    """
    items = list(items)
    if _worker_count <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=_worker_count) as pool:
        return list(pool.map(fn, items))


def fmt(x: float) -> str:
    """Locale-independent float text with 17 significant digits."""
    return format(float(x), ".17g")
