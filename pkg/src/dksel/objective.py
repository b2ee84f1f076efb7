"""
The relaxed objective

    f(x) = theta (k-1) c^T x + (1-theta) x^T (lam I - E E^T) x

its gradient, its restriction to a line, and the swap-direction expansion.
Every quadratic term goes through v = E^T x, so W = E E^T is never formed.
"""
import logging

import numpy as np

from dksel import linalg
from dksel.errors import InfeasibleSwapError, StaleCacheError
from dksel.models.params import SelectParams, SelectionVector
from dksel.models.pool import EmbeddingMatrix
from dksel.models.solver import DirectionalQuadratic, SwapDirection

logger = logging.getLogger(__name__)


def _as_array(x) -> np.ndarray:
    if isinstance(x, SelectionVector):
        return x.x
    return np.asarray(x, dtype=np.float64)


def cache_tolerance(d: int) -> float:
    """Allowed max-abs deviation between the v cache and E^T x"""
    return 1e-5 * np.sqrt(d)


def objective_from_cache(c: np.ndarray, x: np.ndarray, v: np.ndarray, params: SelectParams) -> float:
    """f(x) given v = E^T x"""
    theta = params.theta
    linear = theta * (params.k - 1) * float(np.dot(c, x))
    quadratic = (1.0 - theta) * (params.lam * float(np.dot(x, x)) - float(np.dot(v, v)))
    return linear + quadratic


def eval_objective(matrix: EmbeddingMatrix, c, x, params: SelectParams) -> float:
    """
    Evaluate f at a feasible point.

    Args:
        matrix (EmbeddingMatrix):
            The pool E
        c (np.ndarray):
            Relevance vector
        x (SelectionVector or np.ndarray):
            The point
        params (SelectParams):
            k, theta and lambda are used

    Returns:
        float: f(x)
    """
    x = _as_array(x)
    v = linalg.rmatvec(matrix, x)
    return objective_from_cache(np.asarray(c, dtype=np.float64), x, v, params)


def score_selection(matrix: EmbeddingMatrix, c, selected, params: SelectParams) -> float:
    """f at the indicator of ``selected``, in O(kd)"""
    idx = np.asarray(list(selected), dtype=np.int64)
    c = np.asarray(c, dtype=np.float64)
    v = linalg.gather_sum(matrix, idx)
    theta = params.theta
    return (theta * (params.k - 1) * float(c[idx].sum())
            + (1.0 - theta) * (params.lam * idx.size - float(np.dot(v, v))))


def eval_gradient(matrix: EmbeddingMatrix, c, x, v: np.ndarray, params: SelectParams,
                  verify_cache: bool = False) -> np.ndarray:
    """
    Gradient theta (k-1) c + 2 (1-theta) (lam x - E v), one GEMV.

    Args:
        matrix (EmbeddingMatrix):
            The pool E
        c (np.ndarray):
            Relevance vector
        x (SelectionVector or np.ndarray):
            Current point
        v (np.ndarray):
            Cached E^T x
        params (SelectParams):
            Objective parameters
        verify_cache (bool):
            Recompute E^T x and compare against v first. Costs a second GEMV.

    Returns:
        np.ndarray: the n-vector gradient

    Raises:
        StaleCacheError: verify_cache is set and v is off by more than 1e-5 * sqrt(d)
    """
    x = _as_array(x)
    if verify_cache:
        deviation = float(np.max(np.abs(linalg.rmatvec(matrix, x) - v)))
        tolerance = cache_tolerance(matrix.d)
        if deviation > tolerance:
            raise StaleCacheError(deviation, tolerance)
    theta = params.theta
    grad = theta * (params.k - 1) * np.asarray(c, dtype=np.float64)
    if theta < 1.0:
        grad = grad + 2.0 * (1.0 - theta) * (params.lam * x - linalg.matvec(matrix, v))
    return grad


def directional_quadratic(matrix: EmbeddingMatrix, x, grad: np.ndarray, direction: np.ndarray,
                          params: SelectParams, c=None, v: np.ndarray = None, support=None,
                          base_value: float = None) -> DirectionalQuadratic:
    """
    Restrict f to x + gamma * direction.

    When ``support`` (the k rows of a vertex s) and ``v`` are given, the
    direction is taken to be s - x and E^T d is formed as E^T s - v by gathering
    k rows. Otherwise E^T d is a full product.

    Args:
        matrix (EmbeddingMatrix):
            The pool E
        x (SelectionVector or np.ndarray):
            Base point
        grad (np.ndarray):
            Gradient at x
        direction (np.ndarray):
            Feasible direction d
        params (SelectParams):
            Objective parameters
        c (np.ndarray, optional):
            Relevance, used to fill base_value when it is not passed
        v (np.ndarray, optional):
            Cached E^T x
        support (array-like, optional):
            Indices of s for the sparse decomposition
        base_value (float, optional):
            f(x) when already known

    Returns:
        DirectionalQuadratic: gap, curvature and base value
    """
    x = _as_array(x)
    direction = np.asarray(direction, dtype=np.float64)
    if support is not None and v is not None:
        etd = linalg.gather_sum(matrix, support) - v
    else:
        etd = linalg.rmatvec(matrix, direction)
    delta = float(np.dot(grad, direction))
    curvature = 2.0 * (1.0 - params.theta) * (params.lam * float(np.dot(direction, direction))
                                              - float(np.dot(etd, etd)))
    if base_value is None:
        base_value = eval_objective(matrix, c, x, params) if c is not None else float('nan')
    return DirectionalQuadratic(delta=delta, curvature=curvature, base_value=float(base_value))


def swap_curvature(matrix: EmbeddingMatrix, i: int, j: int, params: SelectParams) -> float:
    """2 (1-theta)(lam - 1 + w_ij): the exact gain per unit delta^2 of a swap"""
    return 2.0 * (1.0 - params.theta) * (params.lam - 1.0 + matrix.similarity(i, j))


def swap_taylor_check(matrix: EmbeddingMatrix, c, x, swap: SwapDirection, params: SelectParams,
                      tol: float = 1e-12):
    """
    Evaluate both sides of the exact expansion along a swap direction:

        f(x + delta (e_i - e_j)) - f(x) = delta (g_i - g_j) + delta^2 * 2 (1-theta)(lam - 1 + w_ij)

    Returns:
        tuple: (lhs, rhs), lhs evaluated directly, rhs from the closed form

    Raises:
        InfeasibleSwapError: i == j, negative step, or the step leaves [0, 1]^n
    """
    x = _as_array(x)
    step = swap.delta_step
    if swap.i == swap.j:
        raise InfeasibleSwapError(f'swap indices must differ, got i = j = {swap.i}')
    if step < 0:
        raise InfeasibleSwapError(f'swap step must be non-negative, got {step}')
    if x[swap.i] + step > 1.0 + tol or x[swap.j] - step < -tol:
        raise InfeasibleSwapError(f'swap ({swap.i} <- {swap.j}, step {step}) leaves the [0, 1] box')

    c = np.asarray(c, dtype=np.float64)
    moved = x + step * swap.vector(x.shape[0])
    lhs = eval_objective(matrix, c, moved, params) - eval_objective(matrix, c, x, params)

    v = linalg.rmatvec(matrix, x)
    theta = params.theta
    # g_i - g_j without the full gradient: only two rows of E v are needed
    g_i = theta * (params.k - 1) * c[swap.i] + 2.0 * (1.0 - theta) * (
        params.lam * x[swap.i] - float(np.dot(matrix.values[swap.i], v)))
    g_j = theta * (params.k - 1) * c[swap.j] + 2.0 * (1.0 - theta) * (
        params.lam * x[swap.j] - float(np.dot(matrix.values[swap.j], v)))
    rhs = step * (g_i - g_j) + step * step * swap_curvature(matrix, swap.i, swap.j, params)
    return lhs, rhs
