"""
Latency benchmarks: per-query wall time over a (method, k, theta) grid, and
the ratios derived from it.
"""
from contextlib import nullcontext
from dataclasses import replace
import logging
import time
from typing import List, Sequence

import numpy as np
import pandas as pd
from threadpoolctl import threadpool_limits

from dksel.classes import BENCH_COLUMNS, BenchResult
from dksel.errors import InvalidParamsError
from dksel.models.params import SelectParams
from dksel.models.pool import EmbeddingMatrix, QueryContext
from dksel.selectors import check_method, run_selector

logger = logging.getLogger(__name__)

DEFAULT_K_VALUES = (25, 50, 100)
DEFAULT_BENCH_THETAS = (0.5, 0.7, 0.9)
MIN_RUNS = 5
MIN_WARMUP = 2


def time_selector(method: str, matrix: EmbeddingMatrix, queries: Sequence[QueryContext], params: SelectParams,
                  runs: int = MIN_RUNS, warmup: int = MIN_WARMUP, parallel: bool = False) -> BenchResult:
    """
    Time one configuration. Warmup runs are discarded; timed runs cycle over the
    queries. Only the selection call is timed, with BLAS held to one thread
    unless parallel is set.

    Args:
        method (str):
            Method name
        matrix (EmbeddingMatrix):
            Validated pool
        queries (list):
            QueryContext objects, at least one
        params (SelectParams):
            Budget and trade-off
        runs (int):
            Timed runs, at least 5
        warmup (int):
            Discarded runs, at least 2
        parallel (bool):
            Leave the BLAS thread pools as the environment configured them

    Returns:
        BenchResult
    """
    check_method(method)
    if runs < MIN_RUNS or warmup < MIN_WARMUP:
        raise InvalidParamsError(f'need runs >= {MIN_RUNS} and warmup >= {MIN_WARMUP}, got {runs}, {warmup}')
    if not queries:
        raise InvalidParamsError('benchmark needs at least one query')

    times = np.empty(runs)
    iterations = np.empty(runs)
    with nullcontext() if parallel else threadpool_limits(limits=1):
        for i in range(warmup):
            run_selector(method, matrix, queries[i % len(queries)].relevance, params)
        for i in range(runs):
            c = queries[i % len(queries)].relevance
            start = time.perf_counter()
            report = run_selector(method, matrix, c, params)
            times[i] = (time.perf_counter() - start) * 1e3
            iterations[i] = report.iterations

    return BenchResult(method=method, n=matrix.n, d=matrix.d, k=params.k, theta=params.theta, runs=runs,
                       mean_ms=float(times.mean()), p50_ms=float(np.percentile(times, 50)),
                       p95_ms=float(np.percentile(times, 95)),
                       iters_mean=float(iterations.mean()) if method == 'fw' else float('nan'))


def scaling_suite(matrix: EmbeddingMatrix, queries: Sequence[QueryContext], k_values=DEFAULT_K_VALUES,
                  thetas=DEFAULT_BENCH_THETAS, methods=('fw', 'mmr'), runs: int = MIN_RUNS,
                  warmup: int = MIN_WARMUP, base_params: SelectParams = None,
                  parallel: bool = False) -> List[BenchResult]:
    """
    Time every (method, k, theta) combination, one configuration at a time.

    Returns:
        list: BenchResult objects in (method, k, theta) order
    """
    base = base_params if base_params is not None else SelectParams(k=min(k_values))
    results = []
    for method in methods:
        for k in k_values:
            for theta in thetas:
                params = replace(base, k=int(k), theta=float(theta))
                params.validate(matrix.n)
                result = time_selector(method, matrix, queries, params, runs=runs, warmup=warmup, parallel=parallel)
                logger.info(f'bench {method} k={k} theta={theta}: mean {result.mean_ms:.2f} ms, '
                            f'p95 {result.p95_ms:.2f} ms')
                results.append(result)
    return results


def results_frame(results: Sequence[BenchResult]) -> pd.DataFrame:
    return pd.DataFrame([r.as_dict() for r in results], columns=BENCH_COLUMNS)


def scaling_ratios(results: Sequence[BenchResult], k_lo: int = 25, k_hi: int = 100) -> pd.DataFrame:
    """
    mean time at k_hi over mean time at k_lo, per (method, theta).
    """
    frame = results_frame(results)
    lo = frame[frame['k'] == k_lo].set_index(['method', 'theta'])['mean_ms']
    hi = frame[frame['k'] == k_hi].set_index(['method', 'theta'])['mean_ms']
    ratios = (hi / lo).dropna().rename('ratio').reset_index()
    return ratios.sort_values(['method', 'theta']).reset_index(drop=True)


def speedups(results: Sequence[BenchResult], method: str = 'fw', baseline: str = 'mmr') -> pd.DataFrame:
    """
    baseline mean time over method mean time, per (theta, k); above 1 means method is faster.
    """
    frame = results_frame(results)
    ours = frame[frame['method'] == method].set_index(['theta', 'k'])['mean_ms']
    theirs = frame[frame['method'] == baseline].set_index(['theta', 'k'])['mean_ms']
    ratio = (theirs / ours).dropna().rename('speedup').reset_index()
    return ratio.sort_values(['theta', 'k']).reset_index(drop=True)


def bench_config(matrix: EmbeddingMatrix, k_values, thetas, methods, runs: int, warmup: int,
                 base_params: SelectParams = None, **extra) -> dict:
    """
    Everything needed to rerun a suite, for the JSON sidecar next to the CSV.
    """
    config = {
        'n': matrix.n,
        'd': matrix.d,
        'k_values': [int(k) for k in k_values],
        'thetas': [float(t) for t in thetas],
        'methods': list(methods),
        'runs': runs,
        'warmup': warmup,
        'params': (base_params or SelectParams(k=min(k_values))).as_dict(),
    }
    config.update(extra)
    return config
