"""
Comparison selectors: exact top-k, greedy MMR and fast greedy DPP MAP.

All three return a SolveReport like solve_fw. W entries are computed from rows
on demand, one column per selected item.
"""
import logging
import time

import numpy as np

from dksel import linalg
from dksel.classes import GreedyTrace, SolveReport
from dksel.errors import InvalidParamsError
from dksel.models.params import SelectParams
from dksel.models.pool import EmbeddingMatrix
from dksel.objective import score_selection

logger = logging.getLogger(__name__)

DPP_DEGENERATE = 1e-12
DPP_THETA_MAX = 1.0 - 1e-9


def _check(n: int, k: int, theta: float = None):
    if not 1 <= k <= n:
        raise InvalidParamsError(f'k must be in [1, {n}], got {k}')
    if theta is not None and not 0.0 <= theta <= 1.0:
        raise InvalidParamsError(f'theta must be in [0, 1], got {theta}')


def _objective(matrix, c, selected, theta):
    if matrix is None:
        return float('nan')
    return score_selection(matrix, c, selected, SelectParams(k=len(selected), theta=theta))


def select_topk(c, k: int, matrix: EmbeddingMatrix = None, theta: float = 1.0) -> SolveReport:
    """
    The k largest relevance scores, ties to the lowest index.

    Args:
        c (np.ndarray):
            Relevance vector
        k (int):
            Budget
        matrix (EmbeddingMatrix, optional):
            When given, the report carries the objective value at ``theta``

    Returns:
        SolveReport: integral report of method 'topk'
    """
    start = time.perf_counter()
    c = np.asarray(c, dtype=np.float64)
    _check(c.shape[0], k)
    selected = linalg.topk_indices(c, k)
    return SolveReport(method='topk', selected=selected.tolist(),
                       objective=_objective(matrix, c, selected, theta),
                       wall_time=time.perf_counter() - start)


def select_mmr(matrix: EmbeddingMatrix, c, k: int, theta: float):
    """
    Greedy maximal marginal relevance.

    The first pick is the most relevant item. Each later pick maximizes
    theta * c_i - (1 - theta) * max_{j in S} w_ij over unselected items, with the
    max-similarity column kept up to date in one GEMV per step (O(knd) total).

    Returns:
        tuple: (SolveReport, GreedyTrace)
    """
    start = time.perf_counter()
    c = np.asarray(c, dtype=np.float64)
    n = matrix.n
    _check(n, k, theta)

    max_sim = np.full(n, -np.inf)
    chosen = np.zeros(n, dtype=bool)
    trace = GreedyTrace()
    for step in range(k):
        if step == 0:
            scores = c.copy()
        else:
            scores = theta * c - (1.0 - theta) * max_sim
        scores[chosen] = -np.inf
        pick = int(np.argmax(scores))
        trace.order.append(pick)
        trace.marginal_scores.append(float(scores[pick]))
        chosen[pick] = True
        if step + 1 < k:
            np.maximum(max_sim, linalg.similarities_to(matrix, pick), out=max_sim)

    report = SolveReport(method='mmr', selected=trace.order,
                         objective=_objective(matrix, c, trace.order, theta),
                         iterations=k, trace=trace, wall_time=time.perf_counter() - start)
    return report, trace


def dpp_quality_exponent(theta: float) -> float:
    """beta in r_i = exp(beta * c_i)"""
    return theta / (1.0 - theta)


def select_dpp_greedy(matrix: EmbeddingMatrix, c, k: int, theta: float):
    """
    Fast greedy MAP inference for the kernel L = Diag(r) W Diag(r), r_i = exp(beta c_i),
    beta = theta / (1 - theta).

    Since L = D W D, the marginal gain det(L_{S+i}) / det(L_S) factors as
    r_i^2 * d_i^2 with d_i^2 the incremental-Cholesky residual of W. Selection
    maximizes the log gain 2 beta c_i + log d_i^2, which stays finite for theta
    close to 1 where r itself would overflow. Candidates with d_i^2 <= 1e-12
    add no volume and are skipped; if fewer than k non-degenerate candidates
    exist, the rest are filled by relevance.

    theta >= 1 - 1e-9 falls back to select_topk.

    Returns:
        tuple: (SolveReport, GreedyTrace)
    """
    start = time.perf_counter()
    c = np.asarray(c, dtype=np.float64)
    n = matrix.n
    _check(n, k, theta)
    if theta >= DPP_THETA_MAX:
        report = select_topk(c, k, matrix=matrix, theta=theta)
        report.method = 'dpp'
        order = linalg.ranked_indices(c)[:k]
        report.trace = GreedyTrace(order=order.tolist(), marginal_scores=c[order].tolist())
        return report, report.trace

    log_quality = 2.0 * dpp_quality_exponent(theta) * c
    d2 = np.einsum('ij,ij->i', matrix.values, matrix.values)
    cis = np.zeros((k, n))
    chosen = np.zeros(n, dtype=bool)
    trace = GreedyTrace()
    for step in range(k):
        usable = (d2 > DPP_DEGENERATE) & ~chosen
        if not usable.any():
            break
        scores = np.full(n, -np.inf)
        scores[usable] = log_quality[usable] + np.log(d2[usable])
        pick = int(np.argmax(scores))
        trace.order.append(pick)
        trace.marginal_scores.append(float(scores[pick]))
        chosen[pick] = True
        if step + 1 == k:
            break
        column = linalg.similarities_to(matrix, pick)
        e = (column - cis[:step, pick] @ cis[:step]) / np.sqrt(d2[pick])
        cis[step] = e
        d2 = d2 - e * e

    if len(trace.order) < k:
        missing = k - len(trace.order)
        logger.warning(f'dpp: only {len(trace.order)} non-degenerate items, filling {missing} by relevance')
        for pick in linalg.ranked_indices(c):
            if len(trace.order) == k:
                break
            if not chosen[pick]:
                chosen[pick] = True
                trace.order.append(int(pick))
                trace.marginal_scores.append(float('-inf'))

    report = SolveReport(method='dpp', selected=trace.order,
                         objective=_objective(matrix, c, trace.order, theta),
                         iterations=k, trace=trace, wall_time=time.perf_counter() - start)
    return report, trace
