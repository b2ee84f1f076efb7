from dataclasses import dataclass, field
from functools import cached_property
from typing import FrozenSet, Optional

import numpy as np


@dataclass(frozen=True)
class EmbeddingMatrix:
    """
    The candidate pool E: n unit-norm rows of dimension d.

    Rows are stored as float32. ``values`` is a float64 working copy, renormalized
    in float64, that every dot product and reduction runs on. The Gram matrix
    W = E E^T is never built here.
    """
    rows: np.ndarray = field(metadata={"description": "n x d float32 rows, row-major"})
    renormalized: int = field(default=0, metadata={"description": "Rows rescaled at load time"})

    def __post_init__(self):
        rows = np.ascontiguousarray(self.rows, dtype=np.float32)
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 1:
            raise ValueError(f'embedding matrix must be 2-D with n, d >= 1, got shape {rows.shape}')
        rows.flags.writeable = False
        object.__setattr__(self, 'rows', rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]

    @cached_property
    def values(self) -> np.ndarray:
        values = self.rows.astype(np.float64)
        values /= np.linalg.norm(values, axis=1, keepdims=True)
        values.flags.writeable = False
        return values

    def similarity(self, i: int, j: int) -> float:
        """w_ij, computed from the two rows"""
        return float(np.dot(self.values[i], self.values[j]))


@dataclass(frozen=True)
class QueryContext:
    """
    Relevance vector c for one query, plus the gold evidence set when known.
    """
    query_id: str = field(metadata={"description": "Query identifier"})
    relevance: np.ndarray = field(metadata={"description": "n-vector c, entries in [-1, 1]"})
    query_embedding: Optional[np.ndarray] = field(default=None, metadata={"description": "Unit-norm d-vector q"})
    gold: FrozenSet[int] = field(default_factory=frozenset, metadata={"description": "Gold evidence indices"})

    def __post_init__(self):
        relevance = np.asarray(self.relevance, dtype=np.float64)
        relevance.flags.writeable = False
        object.__setattr__(self, 'relevance', relevance)
        object.__setattr__(self, 'gold', frozenset(int(i) for i in self.gold))

    @property
    def n(self) -> int:
        return self.relevance.shape[0]
