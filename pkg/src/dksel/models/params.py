from dataclasses import asdict, dataclass, field
import logging

import numpy as np

from dksel.errors import InvalidParamsError

logger = logging.getLogger(__name__)

INIT_MODES = ('topk', 'uniform')


@dataclass(frozen=True)
class SelectParams:
    """
    Every knob of a selection run. ``lam`` is the lambda penalty of the
    regularized objective.
    """
    k: int = field(metadata={"description": "Selection budget"})
    theta: float = field(default=0.5, metadata={"description": "Relevance/diversity trade-off in [0, 1]"})
    lam: float = field(default=2.0, metadata={"description": "Penalty lambda, >= 2 keeps the relaxation tight"})
    max_iters: int = field(default=1000, metadata={"description": "Frank-Wolfe iteration cap T"})
    gap_tol: float = field(default=1e-9, metadata={"description": "Relative FW-gap stopping tolerance"})
    recompute_period: int = field(default=50, metadata={"description": "Iterations between full E^T x recomputation"})
    init: str = field(default='topk', metadata={"description": "Start vertex: 'topk' of c or 'uniform' k/n"})
    allow_small_lambda: bool = field(default=False, metadata={"description": "Permit lambda < 2 for experiments"})
    restarts: int = field(default=0, metadata={"description": "Extra Frank-Wolfe starts; the best vertex wins"})
    polish: bool = field(default=False, metadata={"description": "Pairwise-swap ascent on every Frank-Wolfe vertex"})
    seed: int = field(default=0, metadata={"description": "Seed for the random restart vertices"})

    def validate(self, n: int) -> 'SelectParams':
        """
        Check the parameters against a pool of n items.

        Args:
            n (int):
                Pool size

        Returns:
            SelectParams: self, for chaining
        """
        if not isinstance(self.k, (int, np.integer)) or not 1 <= self.k <= n:
            raise InvalidParamsError(f'k must be an integer in [1, {n}], got {self.k}')
        if not 0.0 <= self.theta <= 1.0:
            raise InvalidParamsError(f'theta must be in [0, 1], got {self.theta}')
        if self.max_iters < 1:
            raise InvalidParamsError(f'max_iters must be >= 1, got {self.max_iters}')
        if self.gap_tol < 0:
            raise InvalidParamsError(f'gap_tol must be >= 0, got {self.gap_tol}')
        if self.recompute_period < 1:
            raise InvalidParamsError(f'recompute_period must be >= 1, got {self.recompute_period}')
        if self.restarts < 0:
            raise InvalidParamsError(f'restarts must be >= 0, got {self.restarts}')
        if self.init not in INIT_MODES:
            raise InvalidParamsError(f"init must be one of {INIT_MODES}, got '{self.init}'")
        if self.lam < 2.0:
            if not self.allow_small_lambda:
                raise InvalidParamsError(f'lambda must be >= 2 (got {self.lam}); '
                                         'pass allow_small_lambda to override')
            logger.warning(f'lambda={self.lam} < 2: the relaxation is not guaranteed tight')
        return self

    def as_dict(self) -> dict:
        data = asdict(self)
        data['lambda'] = data.pop('lam')
        return data


@dataclass
class SelectionVector:
    """
    A point x of the relaxed feasible set {0 <= x <= 1, sum(x) = k}.
    """
    x: np.ndarray = field(metadata={"description": "n-vector of float64"})

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)

    @classmethod
    def indicator(cls, n: int, indices) -> 'SelectionVector':
        x = np.zeros(n)
        x[np.asarray(list(indices), dtype=np.int64)] = 1.0
        return cls(x)

    @classmethod
    def uniform(cls, n: int, k: int) -> 'SelectionVector':
        return cls(np.full(n, k / n))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def check(self, k: int, box_tol: float = 1e-9) -> 'SelectionVector':
        """
        Raise InvalidParamsError unless x lies in the feasible set for budget k.
        """
        if self.x.ndim != 1 or not np.all(np.isfinite(self.x)):
            raise InvalidParamsError('selection vector must be a finite 1-D array')
        if self.x.min() < -box_tol or self.x.max() > 1.0 + box_tol:
            raise InvalidParamsError('selection vector leaves the [0, 1] box')
        total = float(self.x.sum())
        if abs(total - k) > 1e-6 * k:
            raise InvalidParamsError(f'selection vector sums to {total}, expected {k}')
        return self

    def is_integral(self, tol: float = 1e-6) -> bool:
        return bool(np.all(np.minimum(np.abs(self.x), np.abs(self.x - 1.0)) <= tol))

    def support(self) -> np.ndarray:
        """Indices with x_i > 1/2, ascending. Meaningful for integral points."""
        return np.flatnonzero(self.x > 0.5)
