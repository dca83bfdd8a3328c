"""Optional thread fan-out for embarrassingly parallel loops.

Serial by default. Setting KRIGESENSE_THREADS to an integer above 1 runs
the mapped calls on a thread pool; results always come back in input
order, so the parallel level never changes any output.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Sequence, TypeVar

_T = TypeVar("_T")
_R = TypeVar("_R")

__all__ = ["thread_count", "ordered_map"]


def thread_count() -> int:
    raw = os.environ.get("KRIGESENSE_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(n, 1)


def ordered_map(fn: Callable[[_T], _R], items: Sequence[_T]) -> List[_R]:
    n = thread_count()
    if n <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
