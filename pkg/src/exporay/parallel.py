"""Optional thread-based parallelism with deterministic results.

Work items are pure functions of their inputs and results are collected in
input order, so every output is bit-identical regardless of thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def default_threads() -> int:
    """Thread budget: EXPORAY_THREADS env var, else machine parallelism."""
    env = os.environ.get("EXPORAY_THREADS")
    if env is not None and env.strip():
        try:
            v = int(env)
        except ValueError as exc:
            raise ValueError(f"EXPORAY_THREADS must be an integer, got {env!r}") from exc
        return max(1, v)
    return os.cpu_count() or 1


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    seq: Sequence[T] = list(items)
    k = default_threads() if threads is None else max(1, int(threads))
    if k == 1 or len(seq) <= 1:
        return [fn(x) for x in seq]
    with ThreadPoolExecutor(max_workers=min(k, len(seq))) as pool:
        return list(pool.map(fn, seq))
