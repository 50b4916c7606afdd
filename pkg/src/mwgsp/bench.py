"""Timing harness: factor-wise multilinear application vs a dense Kronecker matrix."""
from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

import numpy as np

from .tensor import kron_decremental, multilinear_apply, vec


@dataclass
class BenchResult:
    dims: tuple[int, ...]
    factorwise_s: float
    dense_build_s: float
    dense_matvec_s: float
    max_abs_diff: float

    @property
    def dense_total_s(self) -> float:
        return self.dense_build_s + self.dense_matvec_s

    @property
    def speedup(self) -> float:
        return self.dense_total_s / self.factorwise_s


def run_bench(dims, trials: int = 5, seed: int = 0) -> BenchResult:
    """Median timings over ``trials`` for dense square factors of sizes ``dims``.

    The dense path includes building the Kronecker matrix, which is what a
    caller without the factorization would have to do.
    """
    rng = np.random.default_rng(seed)
    dims = tuple(int(n) for n in dims)
    ops = [rng.standard_normal((n, n)) for n in dims]
    x = rng.standard_normal(dims)
    xv = vec(x)

    fast, build, mv = [], [], []
    diff = 0.0
    for _ in range(trials):
        t0 = time.perf_counter()
        y = multilinear_apply(x, ops)
        t1 = time.perf_counter()
        big = kron_decremental(ops)
        t2 = time.perf_counter()
        yd = big @ xv
        t3 = time.perf_counter()
        del big
        fast.append(t1 - t0)
        build.append(t2 - t1)
        mv.append(t3 - t2)
        diff = max(diff, float(np.max(np.abs(vec(y) - yd))))
    return BenchResult(dims, statistics.median(fast), statistics.median(build), statistics.median(mv), diff)
