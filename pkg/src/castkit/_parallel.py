from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "CASTKIT_THREADS"


def resolve_workers(workers: int | None = None) -> int:
    """Explicit value, else $CASTKIT_THREADS, else 1."""
    if workers is None:
        env = os.environ.get(THREADS_ENV, "").strip()
        workers = int(env) if env else 1
    return max(1, int(workers))


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> list[R]:
    """Order-preserving map; results do not depend on the worker count."""
    items = list(items)
    n = resolve_workers(workers)
    if n == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
