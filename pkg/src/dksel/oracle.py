"""
Brute-force ground truth for tiny pools: the exact integral optimum, every
certified local maximizer, grid searches over the relaxed polytope and dense
neighbourhood checks. Everything here builds the dense Gram matrix.
"""
from itertools import chain, combinations, islice
import logging
import math

import numpy as np

from dksel import linalg
from dksel.classes import ExhaustiveResult
from dksel.errors import InvalidParamsError, NotIntegralError, TooLargeError
from dksel.frankwolfe import CERT_RTOL, INTEGRAL_TOL
from dksel.models.params import SelectParams, SelectionVector
from dksel.models.pool import EmbeddingMatrix
from dksel.models.solver import SwapDirection
from dksel.objective import swap_curvature

logger = logging.getLogger(__name__)

MAX_SUBSETS = 1_000_000
MAX_GRID_N = 8
MAX_GRID_POINTS = 5_000_000
CHUNK = 65536


def _subset_chunks(n: int, k: int, size: int = CHUNK):
    """k-subsets of range(n) in lexicographic order, as (m, k) int arrays"""
    combos = combinations(range(n), k)
    while True:
        flat = np.fromiter(chain.from_iterable(islice(combos, size)), dtype=np.int64)
        if flat.size == 0:
            return
        yield flat.reshape(-1, k)


def _subset_values(subsets: np.ndarray, gram: np.ndarray, c: np.ndarray, params: SelectParams) -> np.ndarray:
    k = subsets.shape[1]
    theta = params.theta
    linear = c[subsets].sum(axis=1)
    pair_sum = np.zeros(subsets.shape[0])
    for a in range(k):
        for b in range(k):
            pair_sum += gram[subsets[:, a], subsets[:, b]]
    return theta * (params.k - 1) * linear + (1.0 - theta) * (params.lam * k - pair_sum)


def _subset_local_max(subsets: np.ndarray, gram: np.ndarray, c: np.ndarray, params: SelectParams) -> np.ndarray:
    """Vectorized certify_vertex over a chunk of subsets"""
    m, n = subsets.shape[0], gram.shape[0]
    theta = params.theta
    indicator = np.zeros((m, n))
    np.put_along_axis(indicator, subsets, 1.0, axis=1)
    grad = theta * (params.k - 1) * c[None, :] + 2.0 * (1.0 - theta) * (
        params.lam * indicator - indicator @ gram)
    selected = indicator > 0.5
    low = np.where(selected, grad, np.inf).min(axis=1)
    high = np.where(selected, -np.inf, grad).max(axis=1)
    tolerance = CERT_RTOL * np.maximum(1.0, np.abs(grad).max(axis=1))
    return (low - high) > tolerance


def brute_force_ccbqp(matrix: EmbeddingMatrix, c, params: SelectParams, find_local_maxima: bool = True,
                      keep_table: bool = False, max_subsets: int = MAX_SUBSETS) -> ExhaustiveResult:
    """
    Enumerate every k-subset and return the exact optimum.

    On 0/1 points lam * ||x||^2 = lam * k, so the argmax is the same for every
    lambda. Ties go to the lexicographically smallest subset.

    Args:
        matrix (EmbeddingMatrix):
            Pool, small enough for a dense Gram matrix
        c (np.ndarray):
            Relevance vector
        params (SelectParams):
            k, theta, lambda
        find_local_maxima (bool):
            Also collect every vertex passing the first-order certificate
        keep_table (bool):
            Keep subset -> objective for every subset
        max_subsets (int):
            Guard on C(n, k)

    Returns:
        ExhaustiveResult

    Raises:
        TooLargeError: C(n, k) exceeds the guard
    """
    n = matrix.n
    params.validate(n)
    k = params.k
    total = math.comb(n, k)
    if total > max_subsets:
        raise TooLargeError(f'exhaustive search over C({n},{k}) = {total} subsets exceeds the '
                            f'guard of {max_subsets}')
    gram = linalg.dense_gram(matrix)
    c = np.asarray(c, dtype=np.float64)

    best_value, best_set = -np.inf, None
    maxima = []
    table = {} if keep_table else None
    for chunk in _subset_chunks(n, k):
        values = _subset_values(chunk, gram, c, params)
        i = int(np.argmax(values))
        if values[i] > best_value:
            best_value, best_set = float(values[i]), tuple(int(j) for j in chunk[i])
        if find_local_maxima:
            flags = _subset_local_max(chunk, gram, c, params)
            maxima.extend(tuple(row) for row in chunk[flags].tolist())
        if keep_table:
            table.update(zip(map(tuple, chunk.tolist()), values.tolist()))
    logger.info(f'exhaustive search: {total} subsets, best {best_value:.6f}, {len(maxima)} local maxima')
    return ExhaustiveResult(best_set=best_set, best_value=best_value, local_maxima=maxima, value_table=table)


def _grid_points(n: int, units: int, target: int, max_points: int) -> np.ndarray:
    """Integer vectors in [0, units]^n summing to target"""
    steps = np.arange(units + 1)
    partial = np.zeros((1, 0), dtype=np.int64)
    sums = np.zeros(1, dtype=np.int64)
    for j in range(n):
        remaining = (n - j - 1) * units
        new_sums = sums[:, None] + steps[None, :]
        ok = (new_sums <= target) & (new_sums + remaining >= target)
        rows, cols = np.nonzero(ok)
        if rows.size > max_points:
            raise TooLargeError(f'grid has more than {max_points} points; use a coarser step')
        partial = np.hstack([partial[rows], steps[cols][:, None]])
        sums = new_sums[rows, cols]
    return partial


def relaxed_grid_max(matrix: EmbeddingMatrix, c, params: SelectParams, step: float = 0.05,
                     max_points: int = MAX_GRID_POINTS):
    """
    Maximum of the relaxed objective over the grid {0, step, ..., 1}^n cut by sum(x) = k.

    Returns:
        tuple: (best value, best grid point as float array)
    """
    n = matrix.n
    if n > MAX_GRID_N:
        raise TooLargeError(f'grid search is limited to n <= {MAX_GRID_N}, got n={n}')
    units = int(round(1.0 / step))
    if units < 1 or abs(units * step - 1.0) > 1e-9:
        raise InvalidParamsError(f'grid step must divide 1, got {step}')
    params.validate(n)
    points = _grid_points(n, units, params.k * units, max_points)
    gram = linalg.dense_gram(matrix)
    c = np.asarray(c, dtype=np.float64)
    theta = params.theta

    best_value, best_point = -np.inf, None
    for lo in range(0, points.shape[0], CHUNK):
        x = points[lo:lo + CHUNK] / units
        values = (theta * (params.k - 1) * (x @ c)
                  + (1.0 - theta) * (params.lam * (x * x).sum(axis=1) - ((x @ gram) * x).sum(axis=1)))
        i = int(np.argmax(values))
        if values[i] > best_value:
            best_value, best_point = float(values[i]), x[i].copy()
    return best_value, best_point


def grid_slack(matrix: EmbeddingMatrix, c, params: SelectParams, step: float) -> float:
    """
    Upper bound on how much the relaxed maximum can exceed the best grid point:
    a sup-norm gradient bound over the box times the L1 distance to the grid.
    """
    c = np.asarray(c, dtype=np.float64)
    n = matrix.n
    grad_bound = (params.theta * (params.k - 1) * float(np.max(np.abs(c)))
                  + 2.0 * (1.0 - params.theta) * (abs(params.lam) + n))
    return grad_bound * n * step


def tightness_gap(matrix: EmbeddingMatrix, c, params: SelectParams, step: float = 0.05) -> float:
    """
    Best relaxed value on a feasible grid minus the exact integral optimum.

    With lambda >= 2 the relaxation is tight, so the result is <= 0 up to
    rounding (the grid contains every vertex). Without the shift it is usually
    positive.

    Raises:
        TooLargeError: n > 8 or the grid is too large
    """
    grid_value, _ = relaxed_grid_max(matrix, c, params, step=step)
    exact = brute_force_ccbqp(matrix, c, params, find_local_maxima=False)
    return grid_value - exact.best_value


def saddle_escape(matrix: EmbeddingMatrix, c, x, params: SelectParams):
    """
    At an integral vertex whose gradient gap is zero, the swap that moves a
    whole unit from the weakest selected item to the strongest unselected one.

    Returns:
        tuple: (SwapDirection, predicted gain 2 (1-theta)(lam - 1 + w_ij))
    """
    x = x if isinstance(x, SelectionVector) else SelectionVector(x)
    if not x.is_integral(INTEGRAL_TOL):
        raise NotIntegralError('saddle_escape needs an integral point')
    c = np.asarray(c, dtype=np.float64)
    gram = linalg.dense_gram(matrix)
    vertex = np.round(x.x)
    grad = params.theta * (params.k - 1) * c + 2.0 * (1.0 - params.theta) * (
        params.lam * vertex - gram @ vertex)
    selected = np.flatnonzero(vertex > 0.5)
    unselected = np.flatnonzero(vertex < 0.5)
    i = int(unselected[np.argmax(grad[unselected])])
    j = int(selected[np.argmin(grad[selected])])
    return SwapDirection(i=i, j=j, delta_step=1.0), swap_curvature(matrix, i, j, params)


def neighborhood_is_local_max(matrix: EmbeddingMatrix, c, x, params: SelectParams, rng=None,
                              samples: int = 200, step: float = 1e-9) -> bool:
    """
    Falsification test of local maximality at an integral vertex: every single
    swap and ``samples`` random feasible directions, each taken a tiny step,
    must strictly decrease f. Changes use the exact quadratic expansion with
    the dense Hessian, so no cancellation in f itself.

    Sound as a falsifier, not a complete verifier: the direction set is sampled.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    x = x if isinstance(x, SelectionVector) else SelectionVector(x)
    c = np.asarray(c, dtype=np.float64)
    gram = linalg.dense_gram(matrix)
    n = matrix.n
    vertex = np.round(x.x)
    hessian = 2.0 * (1.0 - params.theta) * (params.lam * np.eye(n) - gram)
    grad = params.theta * (params.k - 1) * c + 2.0 * (1.0 - params.theta) * (
        params.lam * vertex - gram @ vertex)
    selected = np.flatnonzero(vertex > 0.5)
    unselected = np.flatnonzero(vertex < 0.5)
    if unselected.size == 0:
        return True

    def change(direction):
        return step * float(grad @ direction) + 0.5 * step * step * float(direction @ hessian @ direction)

    for i in unselected:
        for j in selected:
            direction = np.zeros(n)
            direction[i], direction[j] = 1.0, -1.0
            if change(direction) >= 0:
                return False
    for _ in range(samples):
        direction = np.zeros(n)
        direction[unselected] = rng.dirichlet(np.ones(unselected.size))
        direction[selected] = -rng.dirichlet(np.ones(selected.size))
        if change(direction) >= 0:
            return False
    return True
