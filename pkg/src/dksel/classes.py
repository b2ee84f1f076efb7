from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple
import math


def _finite_or_none(value):
    if value is None or (isinstance(value, float) and not math.isfinite(value)):
        return None
    return value


@dataclass
class VertexCertificate:
    """
    First-order classification of an integral vertex: compares the smallest
    gradient entry over the selected set with the largest over the rest.
    """
    grad_gap: float
    is_local_max: bool
    is_strict_saddle: bool
    tolerance: float = 0.0

    @property
    def is_stationary(self) -> bool:
        return self.is_local_max or self.is_strict_saddle

    def as_dict(self):
        """
        Returns a dict object with the certificate fields
        """
        return {
            'grad_gap': _finite_or_none(float(self.grad_gap)),
            'is_local_max': self.is_local_max,
            'is_strict_saddle': self.is_strict_saddle,
        }


@dataclass
class GreedyTrace:
    """
    Selection order and per-step score of a greedy baseline
    """
    order: List[int] = field(default_factory=list)
    marginal_scores: List[float] = field(default_factory=list)

    def as_dict(self):
        return {'order': list(self.order), 'marginal_scores': list(self.marginal_scores)}


@dataclass
class SolveReport:
    """
    Outcome of one selection call, whatever the method
    """
    method: str
    selected: List[int]
    objective: float = float('nan')
    iterations: int = 0
    final_gap: float = 0.0
    integral: bool = True
    local_max_certified: bool = False
    wall_time: float = 0.0
    converged: bool = True
    certificate: Optional[VertexCertificate] = None
    trace: Optional[GreedyTrace] = None
    steps: list = field(default_factory=list)

    def __post_init__(self):
        self.selected = sorted(int(i) for i in self.selected)

    def as_dict(self):
        """
        Returns a dict object with the keys written to JSON reports. Order is fixed.
        """
        data = {
            'method': self.method,
            'selected': list(self.selected),
            'objective': _finite_or_none(float(self.objective)),
            'iterations': int(self.iterations),
            'final_gap': _finite_or_none(float(self.final_gap)),
            'integral': bool(self.integral),
            'local_max_certified': bool(self.local_max_certified),
            'converged': bool(self.converged),
            'wall_time': float(self.wall_time),
        }
        if self.certificate is not None:
            data['certificate'] = self.certificate.as_dict()
        if self.trace is not None:
            data['trace'] = self.trace.as_dict()
        return data


@dataclass
class ExhaustiveResult:
    best_set: Tuple[int, ...]
    best_value: float
    local_maxima: List[Tuple[int, ...]] = field(default_factory=list)
    value_table: Optional[Dict[Tuple[int, ...], float]] = None

    def as_dict(self):
        return {
            'best_set': list(self.best_set),
            'best_value': float(self.best_value),
            'local_maxima': [list(s) for s in self.local_maxima],
        }


EVAL_COLUMNS = ['method', 'theta', 'k', 'query_id', 'recall', 'ilad', 'latency_ms']


@dataclass
class EvalRecord:
    """
    One (method, theta, query) row of a sweep. A failed solve keeps its row with
    NaN metrics and the error message.
    """
    method: str
    theta: float
    k: int
    query_id: str
    recall: float = float('nan')
    ilad: float = float('nan')
    latency_ms: float = float('nan')
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    def as_dict(self):
        """
        Returns a dict object with exactly the CSV columns, in order
        """
        return {name: getattr(self, name) for name in EVAL_COLUMNS}


BENCH_COLUMNS = ['method', 'n', 'd', 'k', 'theta', 'runs', 'mean_ms', 'p50_ms', 'p95_ms', 'iters_mean']


@dataclass
class BenchResult:
    method: str
    n: int
    d: int
    k: int
    theta: float
    runs: int
    mean_ms: float
    p50_ms: float
    p95_ms: float
    iters_mean: float = float('nan')

    def as_dict(self):
        return {name: getattr(self, name) for name in BENCH_COLUMNS}
