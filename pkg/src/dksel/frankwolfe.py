"""
Frank-Wolfe with exact line search over {0 <= x <= 1, sum(x) = k}.

Each iteration costs one GEMV (the gradient), an O(n) top-k selection and an
O(kd) row gather; the n x n Gram matrix is never formed.
"""
from dataclasses import replace
import logging
import time
from typing import Callable, Optional

import numpy as np

from dksel import linalg
from dksel.classes import SolveReport, VertexCertificate
from dksel.errors import IterationCapReached, NegativeGapError, NotIntegralError
from dksel.models.params import SelectParams, SelectionVector
from dksel.models.pool import EmbeddingMatrix
from dksel.models.solver import DirectionalQuadratic, FwState, StepRecord
from dksel.objective import (eval_gradient, eval_objective, objective_from_cache,
                             score_selection)

logger = logging.getLogger(__name__)

INTEGRAL_TOL = 1e-6
LINE_SEARCH_TOL = 1e-9
CERT_RTOL = 1e-7
SWAP_RTOL = 1e-12


def lmo_topk(grad: np.ndarray, k: int) -> np.ndarray:
    """
    Linear maximization oracle: the vertex maximizing <grad, s>.

    Args:
        grad (np.ndarray):
            Gradient
        k (int):
            Budget

    Returns:
        np.ndarray: 0/1 indicator of the k largest entries, ties to the lowest index
    """
    s = np.zeros(grad.shape[0])
    s[linalg.topk_indices(grad, k)] = 1.0
    return s


def exact_line_search(dq: DirectionalQuadratic, tol: float = LINE_SEARCH_TOL) -> float:
    """
    Step maximizing the parabola gamma -> f + gamma * delta + gamma^2 * C / 2 on [0, 1].

    gamma = 1 when C >= 0, otherwise min(1, delta / -C).

    Raises:
        NegativeGapError: delta below -tol (scaled by the base value when known)
    """
    scale = max(1.0, abs(dq.base_value)) if np.isfinite(dq.base_value) else 1.0
    if dq.delta < -tol * scale:
        raise NegativeGapError(dq.delta)
    if dq.curvature >= 0:
        return 1.0
    return float(min(1.0, max(dq.delta, 0.0) / -dq.curvature))


def sparse_etd(matrix: EmbeddingMatrix, s, v: np.ndarray) -> np.ndarray:
    """
    E^T (s - x) as E^T s - v, gathering the k rows of s.

    Args:
        matrix (EmbeddingMatrix):
            The pool E
        s (array-like):
            Either a 0/1 indicator of length n or the k indices it selects
        v (np.ndarray):
            Cached E^T x

    Returns:
        np.ndarray: d-vector
    """
    s = np.asarray(s)
    if s.shape[0] == matrix.n and s.dtype.kind == 'f':
        support = np.flatnonzero(s > 0.5)
    else:
        support = s
    return linalg.gather_sum(matrix, support) - v


def _initial_point(c: np.ndarray, params: SelectParams) -> SelectionVector:
    n = c.shape[0]
    if params.init == 'uniform':
        return SelectionVector.uniform(n, params.k)
    return SelectionVector.indicator(n, linalg.topk_indices(c, params.k))


def certify_vertex(matrix: EmbeddingMatrix, c, x, params: SelectParams) -> VertexCertificate:
    """
    First-order test at an integral vertex.

    grad_gap is min over selected of the gradient minus max over unselected.
    A positive gap (beyond 1e-7 of the gradient scale) certifies a strict local
    maximizer; a gap within tolerance of zero is a stationary point that is not a
    maximizer, i.e. a strict saddle once theta < 1.

    Raises:
        NotIntegralError: x is not within 1e-6 of a 0/1 vector
    """
    if not isinstance(x, SelectionVector):
        x = SelectionVector(x)
    if not x.is_integral(INTEGRAL_TOL):
        raise NotIntegralError('certify_vertex needs an integral point')
    support = x.support()
    if support.size != params.k:
        raise NotIntegralError(f'vertex selects {support.size} items, expected k={params.k}')
    vertex = np.zeros(x.n)
    vertex[support] = 1.0
    c = np.asarray(c, dtype=np.float64)
    v = linalg.gather_sum(matrix, support)
    grad = eval_gradient(matrix, c, vertex, v, params)
    tolerance = CERT_RTOL * max(1.0, float(np.max(np.abs(grad))))

    mask = vertex > 0.5
    if mask.all():
        return VertexCertificate(grad_gap=float('inf'), is_local_max=True, is_strict_saddle=False,
                                 tolerance=tolerance)
    grad_gap = float(grad[mask].min() - grad[~mask].max())
    return VertexCertificate(grad_gap=grad_gap,
                             is_local_max=grad_gap > tolerance,
                             is_strict_saddle=abs(grad_gap) <= tolerance,
                             tolerance=tolerance)


def monotonicity_check(matrix: EmbeddingMatrix, c, x, params: SelectParams, lambda2: float) -> bool:
    """
    Re-certify a local maximizer with a larger penalty lambda2.
    """
    if lambda2 < params.lam:
        raise ValueError(f'lambda2={lambda2} must not be below lambda={params.lam}')
    return certify_vertex(matrix, c, x, replace(params, lam=lambda2)).is_local_max


def _full_report(n: int, method: str, matrix, c, params) -> SolveReport:
    selected = list(range(n))
    objective = score_selection(matrix, c, selected, params) if matrix is not None else float('nan')
    return SolveReport(method=method, selected=selected, objective=objective, integral=True,
                       local_max_certified=True,
                       certificate=VertexCertificate(float('inf'), True, False))


def swap_polish(matrix: EmbeddingMatrix, c, selected, params: SelectParams, max_swaps: int = None):
    """
    Best-improvement pairwise-swap ascent from a vertex.

    Every round scores all (j in, i out) pairs with the exact vertex gain
    g_j - g_i + 2 (1-theta)(lam - 1 + w_ij) from one n x k block of similarities,
    and applies the best pair while its gain is positive. The objective rises
    strictly, so the walk ends; where it ends no single swap improves, which
    certifies a strict local maximizer once theta < 1.

    Args:
        matrix (EmbeddingMatrix):
            Validated pool
        c (np.ndarray):
            Relevance vector
        selected (list):
            The k starting indices
        params (SelectParams):
            Budget and trade-off
        max_swaps (int, optional):
            Stop after this many swaps

    Returns:
        tuple: (ascending selected indices, swaps applied)
    """
    c = np.asarray(c, dtype=np.float64)
    n, k = matrix.n, params.k
    support = np.sort(np.asarray(list(selected), dtype=np.int64))
    if support.size != k or np.unique(support).size != k:
        raise NotIntegralError(f'swap_polish needs k={k} distinct indices, got {support.size}')
    weight = 2.0 * (1.0 - params.theta)
    swaps = 0
    while k < n and (max_swaps is None or swaps < max_swaps):
        x = np.zeros(n)
        x[support] = 1.0
        grad = eval_gradient(matrix, c, x, linalg.gather_sum(matrix, support), params)
        gain = (grad[:, None] - grad[support][None, :]
                + weight * (params.lam - 1.0 + matrix.values @ matrix.values[support].T))
        gain[support, :] = -np.inf
        j, a = np.unravel_index(int(np.argmax(gain)), gain.shape)
        best = float(gain[j, a])
        if best <= SWAP_RTOL * max(1.0, float(np.max(np.abs(grad)))):
            break
        logger.debug(f'swap {support[a]} -> {j}: gain {best:.3e}')
        support[a] = j
        support.sort()
        swaps += 1
    return support.tolist(), swaps


def _restart_points(c: np.ndarray, params: SelectParams) -> list:
    """
    The configured start, then the other init mode, then restarts - 1 random
    vertices drawn from params.seed.
    """
    starts = [_initial_point(c, params)]
    if params.restarts > 0:
        other = 'uniform' if params.init == 'topk' else 'topk'
        starts.append(_initial_point(c, replace(params, init=other)))
        rng = np.random.default_rng(params.seed)
        n = c.shape[0]
        for _ in range(params.restarts - 1):
            starts.append(SelectionVector.indicator(n, rng.choice(n, size=params.k, replace=False)))
    return starts


def _vertex_report(matrix: EmbeddingMatrix, c: np.ndarray, selected, params: SelectParams,
                   iterations: int) -> SolveReport:
    x = SelectionVector.indicator(matrix.n, selected)
    v = linalg.gather_sum(matrix, selected)
    grad = eval_gradient(matrix, c, x.x, v, params)
    direction = -x.x
    direction[linalg.topk_indices(grad, params.k)] += 1.0
    gap = float(np.dot(grad, direction))
    objective = objective_from_cache(c, x.x, v, params)
    certificate = certify_vertex(matrix, c, x, params)
    return SolveReport(method='fw', selected=list(selected), objective=objective, iterations=iterations,
                       final_gap=gap, integral=True, local_max_certified=certificate.is_local_max,
                       converged=gap <= params.gap_tol * max(1.0, abs(objective)), certificate=certificate)


def _fw_run(matrix: EmbeddingMatrix, c: np.ndarray, params: SelectParams, init: SelectionVector,
            callback, record_steps: bool) -> SolveReport:
    n, k = matrix.n, params.k
    x = SelectionVector(np.clip(init.check(k).x, 0.0, 1.0))
    v = linalg.rmatvec(matrix, x.x)
    state = FwState(x=x, v=v, objective=objective_from_cache(c, x.x, v, params))
    steps = []
    converged = False

    if callback is not None:
        callback(state)
    for t in range(params.max_iters + 1):
        grad = eval_gradient(matrix, c, state.x.x, state.v, params)
        support = linalg.topk_indices(grad, k)
        direction = -state.x.x
        direction[support] += 1.0
        gap = float(np.dot(grad, direction))
        state.last_gap = gap
        if gap <= params.gap_tol * max(1.0, abs(state.objective)):
            converged = True
            break
        if t == params.max_iters:
            break

        etd = sparse_etd(matrix, support, state.v)
        curvature = 2.0 * (1.0 - params.theta) * (params.lam * float(np.dot(direction, direction))
                                                  - float(np.dot(etd, etd)))
        dq = DirectionalQuadratic(delta=gap, curvature=curvature, base_value=state.objective)
        gamma = exact_line_search(dq)

        if gamma == 1.0:
            # land exactly on the vertex
            new_x = np.zeros(n)
            new_x[support] = 1.0
            state.v = linalg.gather_sum(matrix, support)
        else:
            new_x = np.clip(state.x.x + gamma * direction, 0.0, 1.0)
            state.v = state.v + gamma * etd
        state.x = SelectionVector(new_x)
        state.iteration = t + 1
        state.objective = dq.value_at(gamma)
        if state.iteration % params.recompute_period == 0:
            state.v = linalg.rmatvec(matrix, state.x.x)
            state.objective = objective_from_cache(c, state.x.x, state.v, params)

        logger.debug(f'fw t={t} gap={gap:.3e} C={curvature:.3e} gamma={gamma:.4f} f={state.objective:.6f}')
        if record_steps:
            steps.append(StepRecord(t, gap, curvature, gamma, state.objective))
        if callback is not None:
            callback(state)

    x = state.x
    integral = x.is_integral(INTEGRAL_TOL)
    if integral:
        selected = x.support()
        certificate = certify_vertex(matrix, c, x, params)
    else:
        selected = linalg.topk_indices(x.x, k)
        certificate = None
    return SolveReport(
        method='fw',
        selected=selected.tolist(),
        objective=eval_objective(matrix, c, x, params),
        iterations=state.iteration,
        final_gap=state.last_gap,
        integral=integral,
        local_max_certified=bool(certificate is not None and certificate.is_local_max),
        converged=converged,
        certificate=certificate,
        steps=steps,
    )


def _multistart(matrix: EmbeddingMatrix, c: np.ndarray, params: SelectParams, callback,
                record_steps: bool) -> SolveReport:
    best = None
    iterations = 0
    for r, x0 in enumerate(_restart_points(c, params)):
        report = _fw_run(matrix, c, params, x0, callback, record_steps)
        iterations += report.iterations
        if params.polish:
            selected, swaps = swap_polish(matrix, c, report.selected, params)
            if swaps or not report.integral:
                report = _vertex_report(matrix, c, selected, params, report.iterations)
        logger.debug(f'fw start {r}: f={report.objective:.6f} integral={report.integral}')
        # integral beats fractional, then the higher objective; ties keep the earlier start
        if best is None or (report.integral, report.objective) > (best.integral, best.objective):
            best = report
    best.iterations = iterations
    return best


def solve_fw(matrix: EmbeddingMatrix, c, params: SelectParams, init: Optional[SelectionVector] = None,
             callback: Callable[[FwState], None] = None, record_steps: bool = False,
             strict: bool = False) -> SolveReport:
    """
    Frank-Wolfe with exact line search.

    Starts at ``init`` (default: the top-k vertex of c), then repeats gradient,
    top-k oracle, gap test and exact line search until the gap drops below
    gap_tol * max(1, |f(x)|) or max_iters is reached. v = E^T x is updated
    incrementally and rebuilt every recompute_period iterations.

    Without an explicit ``init``, params.restarts and params.polish switch on
    the multi-start variant: FW runs from every start of _restart_points, each
    result is swap-polished when asked, and the best vertex is reported with
    the iterations summed over all starts.

    Args:
        matrix (EmbeddingMatrix):
            Validated pool
        c (np.ndarray):
            Relevance vector
        params (SelectParams):
            Budget, trade-off and solver knobs
        init (SelectionVector, optional):
            Feasible starting point; disables restarts and polishing
        callback (callable, optional):
            Called with the FwState at every iteration boundary
        record_steps (bool):
            Keep a StepRecord per iteration in report.steps
        strict (bool):
            Raise IterationCapReached instead of returning a non-converged report

    Returns:
        SolveReport: selection, objective, iterations, final gap and certificate
    """
    start = time.perf_counter()
    c = np.asarray(c, dtype=np.float64)
    n = matrix.n
    params.validate(n)
    k = params.k
    if c.shape[0] != n:
        raise ValueError(f'relevance has length {c.shape[0]}, pool has {n} rows')
    if k == n:
        report = _full_report(n, 'fw', matrix, c, params)
        report.wall_time = time.perf_counter() - start
        return report

    if init is not None or (params.restarts == 0 and not params.polish):
        x0 = init if init is not None else _initial_point(c, params)
        report = _fw_run(matrix, c, params, x0, callback, record_steps)
    else:
        report = _multistart(matrix, c, params, callback, record_steps)
    report.wall_time = time.perf_counter() - start
    logger.info(f'fw k={k} theta={params.theta} iterations={report.iterations} '
                f'gap={report.final_gap:.3e} integral={report.integral} time={report.wall_time * 1e3:.1f}ms')
    if not report.converged:
        logger.warning(f'fw hit the iteration cap ({params.max_iters}) with gap {report.final_gap:.3e}')
        if strict:
            raise IterationCapReached(report)
    return report


def one_step_basin_radius(matrix: EmbeddingMatrix, c, x_star, params: SelectParams,
                          epsilons=(1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4)) -> float:
    """
    Largest epsilon for which starting at (1 - eps) x* + eps * (k/n) 1 reaches x*
    in exactly one step with gamma = 1. Returns 0.0 when none does.

    An empirical measure of the local exact-convergence neighbourhood; it makes no
    claim about the true radius.
    """
    if not isinstance(x_star, SelectionVector):
        x_star = SelectionVector(x_star)
    target = x_star.support().tolist()
    uniform = SelectionVector.uniform(x_star.n, params.k).x
    one_step = replace(params, max_iters=1)
    for eps in sorted(epsilons, reverse=True):
        start = SelectionVector((1.0 - eps) * x_star.x + eps * uniform)
        report = solve_fw(matrix, c, one_step, init=start, record_steps=True)
        if (report.selected == target and report.integral and len(report.steps) == 1
                and report.steps[0].gamma == 1.0):
            return float(eps)
    return 0.0
