from dataclasses import dataclass, field

import numpy as np

from dksel.models.params import SelectionVector


@dataclass(frozen=True)
class DirectionalQuadratic:
    """
    The objective restricted to the ray x + gamma * d. Exact, the objective is quadratic.
    """
    delta: float = field(metadata={"description": "FW gap <grad f(x), d>"})
    curvature: float = field(metadata={"description": "d^T Hess f d"})
    base_value: float = field(default=float('nan'), metadata={"description": "f(x)"})

    def value_at(self, gamma: float) -> float:
        return self.base_value + gamma * self.delta + 0.5 * gamma * gamma * self.curvature


@dataclass(frozen=True)
class SwapDirection:
    """
    d = e_i - e_j scaled by delta_step: moves mass from j to i.
    """
    i: int = field(metadata={"description": "Entering index"})
    j: int = field(metadata={"description": "Leaving index"})
    delta_step: float = field(metadata={"description": "Step length"})

    def vector(self, n: int) -> np.ndarray:
        d = np.zeros(n)
        d[self.i] = 1.0
        d[self.j] = -1.0
        return d


@dataclass
class FwState:
    """
    Per-solve Frank-Wolfe state. v caches E^T x.
    """
    x: SelectionVector
    v: np.ndarray
    iteration: int = 0
    last_gap: float = float('inf')
    objective: float = float('nan')


@dataclass(frozen=True)
class StepRecord:
    iteration: int
    gap: float
    curvature: float
    gamma: float
    objective: float
