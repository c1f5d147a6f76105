"""
Result types for the adaptive ranking lasso path.
"""
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
import numpy.typing as npt


@dataclass(frozen=True)
class PathPoint:
    """Solution of the bounded problem at one value of s."""

    s: float
    mu: npt.NDArray[np.float64]
    groups: Tuple[Tuple[int, ...], ...]
    loglik: float
    tic: float
    penalty: float
    iterations: int = 0

    def __post_init__(self) -> None:
        mu = np.array(self.mu, dtype=np.float64)
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)

    @property
    def p(self) -> int:
        return len(self.groups)

    def group_of(self, index: int) -> Tuple[int, ...]:
        for group in self.groups:
            if index in group:
                return group
        raise KeyError(index)


@dataclass(frozen=True)
class LassoPath:
    """Sequence of path points from complete shrinkage to the unpenalized fit."""

    labels: Tuple[str, ...]
    points: Tuple[PathPoint, ...]
    weights: npt.NDArray[np.float64]  # symmetric n x n, zero diagonal
    selected: int
    phi: float
    penalty_at_qle: float

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=np.float64)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def selected_point(self) -> PathPoint:
        return self.points[self.selected]

    def weight_map(self) -> Dict[Tuple[int, int], float]:
        n = len(self.labels)
        return {(i, j): float(self.weights[i, j]) for i in range(n) for j in range(i + 1, n)}
