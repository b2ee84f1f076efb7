"""
Retrieval metrics and the theta sweep behind the recall/diversity trade-off plots.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
import logging
import time
from typing import List, Sequence

import numpy as np
import pandas as pd

from dksel.classes import EVAL_COLUMNS, EvalRecord
from dksel.errors import DkselError, EmptyGoldError, InvalidParamsError, TooFewItemsError
from dksel.models.params import SelectParams
from dksel.models.pool import EmbeddingMatrix, QueryContext
from dksel.selectors import check_method, run_selector
from dksel.settings import resolve_threads

logger = logging.getLogger(__name__)

DEFAULT_THETAS = tuple(round(0.1 * i, 1) for i in range(1, 10))


def recall_at_k(selected, gold) -> float:
    """
    Fraction of the gold evidence covered by the selection.

    Raises:
        EmptyGoldError: gold is empty
    """
    gold = set(int(i) for i in gold)
    if not gold:
        raise EmptyGoldError()
    return len(gold.intersection(int(i) for i in selected)) / len(gold)


def ilad(matrix: EmbeddingMatrix, selected) -> float:
    """
    Intra-list average distance: mean of 1 - w_ij over unordered pairs of the selection.

    Raises:
        TooFewItemsError: fewer than two items
    """
    idx = np.asarray(sorted(int(i) for i in selected), dtype=np.int64)
    k = idx.size
    if k < 2:
        raise TooFewItemsError(k)
    rows = matrix.values[idx]
    gram = rows @ rows.T
    upper = gram[np.triu_indices(k, 1)]
    return float(np.clip(np.mean(1.0 - upper), 0.0, 2.0))


def jaccard(a, b) -> float:
    a, b = set(a), set(b)
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def dominates(a, b) -> bool:
    """(recall, ilad) point a Pareto-dominates b: no worse in both, better in one"""
    return a[0] >= b[0] and a[1] >= b[1] and (a[0] > b[0] or a[1] > b[1])


def _evaluate(matrix, query: QueryContext, method: str, params: SelectParams) -> EvalRecord:
    record = EvalRecord(method=method, theta=params.theta, k=params.k, query_id=query.query_id)
    try:
        start = time.perf_counter()
        report = run_selector(method, matrix, query.relevance, params)
        record.latency_ms = (time.perf_counter() - start) * 1e3
        if query.gold:
            record.recall = recall_at_k(report.selected, query.gold)
        if params.k >= 2:
            record.ilad = ilad(matrix, report.selected)
    except DkselError as e:
        record.error = str(e)
        logger.warning(f'{method} theta={params.theta} query={query.query_id} failed: {e}')
    return record


def pareto_sweep(matrix: EmbeddingMatrix, queries: Sequence[QueryContext], methods: Sequence[str],
                 thetas: Sequence[float] = DEFAULT_THETAS, k: int = 10, base_params: SelectParams = None,
                 threads: int = None) -> List[EvalRecord]:
    """
    Run every (method, theta, query) and record recall, ILAD and latency.

    A failing solve is kept as a record with NaN metrics and its error instead of
    aborting the sweep. Latency covers the selection call only.

    Args:
        matrix (EmbeddingMatrix):
            Validated pool
        queries (list):
            QueryContext objects; recall needs their gold sets
        methods (list):
            Method names
        thetas (list):
            Trade-off values in [0, 1], default 0.1 .. 0.9
        k (int):
            Budget
        base_params (SelectParams, optional):
            Solver knobs other than k and theta
        threads (int, optional):
            Worker count, default from DKSEL_THREADS

    Returns:
        list: EvalRecord objects sorted by (method, theta, query_id)
    """
    for method in methods:
        check_method(method)
    for theta in thetas:
        if not 0.0 <= theta <= 1.0:
            raise InvalidParamsError(f'theta values must be in [0, 1], got {theta}')
    base = base_params if base_params is not None else SelectParams(k=k)
    tasks = [(method, replace(base, k=k, theta=float(theta)), query)
             for method in methods for theta in thetas for query in queries]
    workers = resolve_threads(threads)
    logger.info(f'sweep: {len(tasks)} solves on {workers} worker(s)')

    if workers == 1:
        records = [_evaluate(matrix, query, method, params) for method, params, query in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda task: _evaluate(matrix, task[2], task[0], task[1]), tasks))
    records.sort(key=lambda r: (r.method, r.theta, r.query_id))
    return records


def records_frame(records: Sequence[EvalRecord]) -> pd.DataFrame:
    return pd.DataFrame([r.as_dict() for r in records], columns=EVAL_COLUMNS)


def summarize_sweep(records: Sequence[EvalRecord]) -> pd.DataFrame:
    """
    Aggregate per (method, theta, k): mean recall and ILAD, mean and p95 latency,
    plus the share of queries with recall >= 0.8 and with recall = 1.
    """
    frame = records_frame(records)
    frame['failed'] = [r.failed for r in records]
    grouped = frame.groupby(['method', 'theta', 'k'], sort=True)
    summary = grouped.agg(
        queries=('query_id', 'count'),
        failures=('failed', 'sum'),
        recall_mean=('recall', 'mean'),
        ilad_mean=('ilad', 'mean'),
        latency_mean_ms=('latency_ms', 'mean'),
        latency_p95_ms=('latency_ms', lambda s: s.quantile(0.95)),
        recall_ge_0_8=('recall', lambda s: (s.dropna() >= 0.8).mean()),
        recall_eq_1=('recall', lambda s: (s.dropna() >= 1.0).mean()),
    )
    return summary.reset_index()


def pareto_frontier(summary: pd.DataFrame, x: str = 'recall_mean', y: str = 'ilad_mean') -> pd.DataFrame:
    """
    Rows of a summary not dominated in (x, y) by any other row.
    """
    points = summary[[x, y]].to_numpy()
    keep = [not any(dominates(other, point) for other in points) for point in points]
    return summary[keep].reset_index(drop=True)
