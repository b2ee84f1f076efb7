"""
One entry point for every selection method, keyed by name.
"""
import logging
import time

import numpy as np

from dksel.baselines import select_dpp_greedy, select_mmr, select_topk
from dksel.classes import SolveReport, VertexCertificate
from dksel.errors import UnknownMethodError
from dksel.frankwolfe import certify_vertex, solve_fw
from dksel.models.params import SelectParams, SelectionVector
from dksel.models.pool import EmbeddingMatrix
from dksel.objective import score_selection
from dksel.oracle import brute_force_ccbqp

logger = logging.getLogger(__name__)


def _fw(matrix, c, params):
    return solve_fw(matrix, c, params)


def _mmr(matrix, c, params):
    return select_mmr(matrix, c, params.k, params.theta)[0]


def _dpp(matrix, c, params):
    return select_dpp_greedy(matrix, c, params.k, params.theta)[0]


def _topk(matrix, c, params):
    return select_topk(c, params.k, matrix=matrix, theta=params.theta)


def _exact(matrix, c, params):
    start = time.perf_counter()
    result = brute_force_ccbqp(matrix, c, params, find_local_maxima=False)
    vertex = SelectionVector.indicator(matrix.n, result.best_set)
    certificate = certify_vertex(matrix, c, vertex, params)
    return SolveReport(method='exact', selected=list(result.best_set), objective=result.best_value,
                       local_max_certified=certificate.is_local_max, certificate=certificate,
                       wall_time=time.perf_counter() - start)


SELECTORS = {
    'fw': _fw,
    'mmr': _mmr,
    'dpp': _dpp,
    'topk': _topk,
    'exact': _exact,
}


def check_method(method: str) -> str:
    if method not in SELECTORS:
        raise UnknownMethodError(method, SELECTORS)
    return method


def run_selector(method: str, matrix: EmbeddingMatrix, c, params: SelectParams) -> SolveReport:
    """
    Run a named method on one relevance vector.

    Args:
        method (str):
            One of 'fw', 'mmr', 'dpp', 'topk', 'exact'
        matrix (EmbeddingMatrix):
            Validated pool
        c (np.ndarray):
            Relevance vector
        params (SelectParams):
            Budget, trade-off and solver knobs

    Returns:
        SolveReport: the method's report; when k = n, the full set without running anything
    """
    check_method(method)
    params.validate(matrix.n)
    c = np.asarray(c, dtype=np.float64)
    if params.k == matrix.n:
        selected = list(range(matrix.n))
        return SolveReport(method=method, selected=selected,
                           objective=score_selection(matrix, c, selected, params),
                           local_max_certified=True,
                           certificate=VertexCertificate(float('inf'), True, False))
    report = SELECTORS[method](matrix, c, params)
    if method in ('mmr', 'dpp', 'topk'):
        # rescore at the caller's lambda
        report.objective = score_selection(matrix, c, report.selected, params)
    return report
