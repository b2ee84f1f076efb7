"""
Pool validation and relevance scoring.
"""
import logging

import numpy as np

from dksel.errors import (DimensionMismatchError, InvalidParamsError, NonFiniteError,
                          ZeroRowError)
from dksel.models.pool import EmbeddingMatrix, QueryContext

logger = logging.getLogger(__name__)

NORM_TOL = 1e-6
ZERO_NORM = 1e-6


def validate_pool(matrix) -> EmbeddingMatrix:
    """
    Validate a raw pool and bring every row to unit norm.

    Rows already within 1e-6 of unit norm are kept bit for bit; the others are
    rescaled (in float64, then stored as float32) and counted.

    Args:
        matrix (EmbeddingMatrix or array-like):
            n x d embeddings

    Returns:
        EmbeddingMatrix: the validated pool

    Raises:
        NonFiniteError: a row holds NaN or Inf
        ZeroRowError: a row's norm is below 1e-6
    """
    if isinstance(matrix, EmbeddingMatrix):
        raw = matrix.rows
    else:
        raw = np.asarray(matrix)
    if raw.ndim != 2 or raw.shape[0] < 1 or raw.shape[1] < 1:
        raise InvalidParamsError(f'pool must be a 2-D array with n, d >= 1, got shape {raw.shape}')

    finite = np.isfinite(raw).all(axis=1)
    if not finite.all():
        raise NonFiniteError(int(np.flatnonzero(~finite)[0]))

    raw64 = raw.astype(np.float64, copy=False)
    norms = np.linalg.norm(raw64, axis=1)
    tiny = norms < ZERO_NORM
    if tiny.any():
        index = int(np.flatnonzero(tiny)[0])
        raise ZeroRowError(index, float(norms[index]))

    off = np.abs(norms - 1.0) > NORM_TOL
    rows = raw.astype(np.float32)
    count = int(off.sum())
    if count:
        rows[off] = (raw64[off] / norms[off, None]).astype(np.float32)
        logger.info(f'renormalized {count} of {raw.shape[0]} rows to unit norm')
    return EmbeddingMatrix(rows, renormalized=count)


def _unit_query(query, d: int) -> np.ndarray:
    q = np.asarray(query, dtype=np.float64).reshape(-1)
    if q.shape[0] != d:
        raise DimensionMismatchError(d, q.shape[0])
    if not np.all(np.isfinite(q)):
        raise NonFiniteError(-1)
    norm = np.linalg.norm(q)
    if norm < ZERO_NORM:
        raise ZeroRowError(-1, float(norm))
    if abs(norm - 1.0) > NORM_TOL:
        logger.debug(f'query norm {norm:.6f}, normalizing')
        q = q / norm
    return q


def relevance_from_query(matrix: EmbeddingMatrix, query) -> np.ndarray:
    """
    c = E q for a unit-norm query q.

    Args:
        matrix (EmbeddingMatrix):
            Validated pool
        query (array-like):
            d-vector

    Returns:
        np.ndarray: n relevance scores in [-1, 1]
    """
    q = _unit_query(query, matrix.d)
    return np.clip(matrix.values @ q, -1.0, 1.0)


def _check_gold(gold, n: int) -> frozenset:
    gold = frozenset(int(i) for i in (gold or ()))
    bad = [i for i in gold if not 0 <= i < n]
    if bad:
        raise InvalidParamsError(f'gold indices out of range for n={n}: {sorted(bad)[:5]}')
    return gold


def make_query(matrix: EmbeddingMatrix, query_embedding, query_id: str = 'q0', gold=None) -> QueryContext:
    """
    Build a QueryContext from a query embedding.
    """
    q = _unit_query(query_embedding, matrix.d)
    relevance = np.clip(matrix.values @ q, -1.0, 1.0)
    return QueryContext(query_id=str(query_id), relevance=relevance, query_embedding=q,
                        gold=_check_gold(gold, matrix.n))


def query_from_relevance(relevance, query_id: str = 'q0', gold=None, n: int = None) -> QueryContext:
    """
    Build a QueryContext from externally supplied scores (e.g. a cross-encoder).

    Only c_i in [-1, 1] is covered by the theory; scores outside it are accepted
    with a warning.
    """
    c = np.asarray(relevance, dtype=np.float64).reshape(-1)
    if n is not None and c.shape[0] != n:
        raise DimensionMismatchError(n, c.shape[0], what='relevance vector')
    if not np.all(np.isfinite(c)):
        raise NonFiniteError(int(np.flatnonzero(~np.isfinite(c))[0]))
    if c.size and (c.min() < -1.0 - 1e-6 or c.max() > 1.0 + 1e-6):
        logger.warning(f'query {query_id}: relevance outside [-1, 1] (range {c.min():.3f}..{c.max():.3f})')
    return QueryContext(query_id=str(query_id), relevance=c, gold=_check_gold(gold, c.shape[0]))
