"""
Row-oriented kernels over an EmbeddingMatrix.

All products run on the float64 working copy. Nothing here builds the n x n
Gram matrix except ``dense_gram``, which is for oracles on small pools.
"""
import numpy as np

from dksel.errors import TooLargeError
from dksel.models.pool import EmbeddingMatrix

DENSE_GRAM_MAX_N = 4096


def matvec(matrix: EmbeddingMatrix, v: np.ndarray) -> np.ndarray:
    """E v, one n x d GEMV"""
    return matrix.values @ v


def rmatvec(matrix: EmbeddingMatrix, x: np.ndarray) -> np.ndarray:
    """E^T x"""
    return matrix.values.T @ x


def gather_sum(matrix: EmbeddingMatrix, indices) -> np.ndarray:
    """
    Sum of the rows at ``indices``: E^T s for a 0/1 indicator s, in O(kd).

    Rows are gathered in ascending index order, so the result does not depend on
    the order the caller lists them in.
    """
    idx = np.sort(np.asarray(indices, dtype=np.int64))
    return matrix.values[idx].sum(axis=0)


def similarities_to(matrix: EmbeddingMatrix, j: int) -> np.ndarray:
    """Column j of W, i.e. w_ij for every i"""
    return matrix.values @ matrix.values[j]


def dense_gram(matrix: EmbeddingMatrix, max_n: int = DENSE_GRAM_MAX_N) -> np.ndarray:
    if matrix.n > max_n:
        raise TooLargeError(f'refusing to build a dense {matrix.n} x {matrix.n} Gram matrix (limit {max_n})')
    return matrix.values @ matrix.values.T


def topk_indices(values: np.ndarray, k: int) -> np.ndarray:
    """
    Indices of the k largest entries, ascending.

    Ties are broken by lowest index: the order is value descending, then index
    ascending. Runs in O(n) with numpy's introselect.

    Args:
        values (np.ndarray):
            1-D array of scores
        k (int):
            How many to keep, 1 <= k <= len(values)

    Returns:
        np.ndarray: k int64 indices sorted ascending
    """
    values = np.asarray(values)
    n = values.shape[0]
    if k >= n:
        return np.arange(n, dtype=np.int64)
    threshold = np.partition(values, n - k)[n - k]
    above = np.flatnonzero(values > threshold)
    ties = np.flatnonzero(values == threshold)[:k - above.size]
    return np.sort(np.concatenate([above, ties]))


def ranked_indices(values: np.ndarray) -> np.ndarray:
    """Full ordering under the same rule as topk_indices: value descending, index ascending"""
    values = np.asarray(values)
    return np.lexsort((np.arange(values.shape[0]), -values))
