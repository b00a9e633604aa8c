"""Seed derivation and ordered parallel execution.

Every replica (or fixed-size chunk of draws) gets its own generator derived
from ``(master_seed, index)``, so results never depend on how work is split
across workers.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

# replicas per work unit; fixed so chunk contents never depend on worker count
CHUNK = 64


def derived_rng(master_seed: int, *index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(i) for i in index))
    return np.random.default_rng(ss)


def sub_seed(master_seed: int, *key: int) -> int:
    """Independent 63-bit seed for the stream labelled ``key``."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    hi, lo = ss.generate_state(2, np.uint32)
    return int(hi & 0x7FFFFFFF) << 32 | int(lo)


def chunk_ranges(total: int, size: int = CHUNK) -> list[tuple[int, int]]:
    return [(lo, min(lo + size, total)) for lo in range(0, total, size)]


def ordered_map(fn: Callable[[T], R], items: Sequence[T] | Iterable[T], workers: int = 1) -> list[R]:
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
