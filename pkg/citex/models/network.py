"""
Result types for clustering and Eigenfactor computations.
"""
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
import numpy.typing as npt


def _readonly(values: npt.ArrayLike, dtype=np.float64) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric correlation distances with zero diagonal."""

    labels: Tuple[str, ...]
    d: npt.NDArray[np.float64]

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "d", _readonly(self.d))

    @property
    def n(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class Merge:
    """One agglomeration step.

    Cluster ids follow the scipy convention: leaves are 0..n-1 and the
    cluster created by merge k gets id n + k.
    """

    left: int
    right: int
    height: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    labels: Tuple[str, ...]
    merges: Tuple[Merge, ...]
    leaf_order: Tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def heights(self) -> npt.NDArray[np.float64]:
        return np.array([m.height for m in self.merges], dtype=np.float64)

    def to_linkage(self) -> npt.NDArray[np.float64]:
        """Linkage matrix in the layout scipy.cluster.hierarchy expects."""
        return np.array(
            [[m.left, m.right, m.height, m.size] for m in self.merges], dtype=np.float64
        ).reshape(-1, 4)

    def members(self, cluster_id: int) -> List[int]:
        """Leaves under a cluster id."""
        if cluster_id < self.n:
            return [cluster_id]
        merge = self.merges[cluster_id - self.n]
        return self.members(merge.left) + self.members(merge.right)


@dataclass(frozen=True)
class EigenResult:
    """Stationary vector, Eigenfactor and Article Influence scores."""

    labels: Tuple[str, ...]
    psi: npt.NDArray[np.float64]
    ef: npt.NDArray[np.float64]
    ai: npt.NDArray[np.float64]  # NaN where the article share is zero
    a: npt.NDArray[np.float64]
    damping: float
    iterations: int
    residual: float
    dangling: npt.NDArray[np.bool_]

    def __post_init__(self) -> None:
        for name in ("psi", "ef", "ai", "a"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        object.__setattr__(self, "dangling", _readonly(self.dangling, dtype=bool))
