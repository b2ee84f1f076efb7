"""
Dense oracles and instance builders shared by the tests.
"""
from itertools import combinations

import numpy as np

from dksel.models import EmbeddingMatrix
from dksel.pool import make_query
from dksel.synth import random_pool


def unit_rows(rows):
    rows = np.asarray(rows, dtype=np.float64)
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def dense_gram(matrix: EmbeddingMatrix):
    return matrix.values @ matrix.values.T


def dense_objective(matrix: EmbeddingMatrix, c, x, k, theta, lam):
    """theta (k-1) c^T x + (1-theta) x^T (lam I - W) x with W materialized"""
    w = dense_gram(matrix)
    x = np.asarray(x, dtype=np.float64)
    return theta * (k - 1) * float(c @ x) + (1 - theta) * float(x @ (lam * np.eye(len(x)) - w) @ x)


def indicator(n, indices):
    x = np.zeros(n)
    x[list(indices)] = 1.0
    return x


def random_instance(rng, n, d, clusters=None):
    matrix = random_pool(n, d, rng, clusters=clusters)
    query = make_query(matrix, rng.standard_normal(d))
    return matrix, np.array(query.relevance)


def random_feasible(rng, n, k):
    """A strictly interior-ish fractional point of {0 <= x <= 1, sum x = k}"""
    x = np.full(n, k / n)
    for _ in range(20):
        i, j = rng.choice(n, size=2, replace=False)
        step = rng.uniform(0, min(1 - x[i], x[j]))
        x[i] += step
        x[j] -= step
    return x


def naive_topk(values, k):
    order = sorted(range(len(values)), key=lambda i: (-values[i], i))
    return sorted(order[:k])


def enumerate_vertices(n, k):
    return [tuple(s) for s in combinations(range(n), k)]
