"""Deterministic, splittable random streams.

Every stochastic routine in the library takes an explicit numpy Generator.
Experiments derive one generator per (master seed, stream name, replica)
triple, so replicas are reproducible independently of scheduling order or
worker count.
"""

from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")


def _label_key(label: str | int) -> int:
    if isinstance(label, int):
        return label & 0xFFFFFFFF
    # crc32 is stable across platforms and Python versions, unlike hash()
    return zlib.crc32(label.encode("utf8"))


def substream(master_seed: int, *labels: str | int) -> np.random.Generator:
    """Generator for the stream addressed by (master_seed, *labels)."""
    key = tuple(_label_key(l) for l in labels)
    return np.random.default_rng(np.random.SeedSequence(entropy=master_seed, spawn_key=key))


def worker_count() -> int:
    """Worker cap from the LWC_THREADS environment variable (default 1)."""
    raw = os.environ.get("LWC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def replica_map(
    fn: Callable[[int, np.random.Generator], T],
    replicas: int,
    master_seed: int,
    name: str,
) -> list[T]:
    """Run fn(i, rng_i) for i in range(replicas) and collect results in index order.

    Each replica owns the stream (master_seed, name, i). With LWC_THREADS > 1
    the calls run on a thread pool; the reduction is by replica index either
    way, so results are identical for any worker count.
    """
    rngs = [substream(master_seed, name, i) for i in range(replicas)]
    workers = worker_count()
    if workers <= 1 or replicas <= 1:
        return [fn(i, rngs[i]) for i in range(replicas)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, i, rngs[i]) for i in range(replicas)]
        return [f.result() for f in futures]


def summarize(values: Sequence[float]) -> tuple[float, float]:
    """Sample mean and its standard error."""
    arr = np.asarray(values, dtype=float)
    if arr.size <= 1:
        return float(arr.mean()) if arr.size else float("nan"), float("nan")
    return float(arr.mean()), float(arr.std(ddof=1) / np.sqrt(arr.size))
