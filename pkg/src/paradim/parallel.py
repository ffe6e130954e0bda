"""Ordered thread fan-out. Work is split into fixed blocks so results never
depend on how many workers ran them."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("PARADIM_WORKERS", "1")))
    except ValueError:
        return 1


def ordered_map(fn, items, workers: int | None = None):
    items = list(items)
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def blocks(n: int, size: int):
    return [(i, min(i + size, n)) for i in range(0, n, size)]
