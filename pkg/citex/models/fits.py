"""
Result types for the Stigler model and quasi-variances.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import numpy.typing as npt

from citex.core.exceptions import UnknownJournalError


def _readonly(values: npt.ArrayLike) -> npt.NDArray[np.float64]:
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class StiglerFit:
    """Quasi-likelihood estimates of journal export scores."""

    labels: Tuple[str, ...]
    mu: npt.NDArray[np.float64]
    vcov: npt.NDArray[np.float64]
    phi: Optional[float]  # None when m - n + 1 <= 0
    m: int
    loglik: float
    converged: bool
    iterations: int
    score_norm: float
    constraint: str = "sum"

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "mu", _readonly(self.mu))
        object.__setattr__(self, "vcov", _readonly(self.vcov))

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def dispersion(self) -> float:
        """Dispersion used to scale variances (1 when unavailable)."""
        return self.phi if self.phi is not None else 1.0

    @property
    def se(self) -> npt.NDArray[np.float64]:
        return np.sqrt(np.clip(np.diag(self.vcov), 0.0, None))

    def index_of(self, abbrev: str) -> int:
        try:
            return self.labels.index(abbrev)
        except ValueError:
            raise UnknownJournalError(abbrev) from None

    def score_of(self, abbrev: str) -> float:
        return float(self.mu[self.index_of(abbrev)])

    def contrast_variance(self, i: int, j: int) -> float:
        """var(mu_i - mu_j) from the full variance matrix."""
        v = self.vcov
        return float(v[i, i] - 2.0 * v[i, j] + v[j, j])

    def recentered(self) -> "StiglerFit":
        """Re-express the fit under the sum-to-zero constraint."""
        n = self.n
        centering = np.eye(n) - np.full((n, n), 1.0 / n)
        return StiglerFit(
            labels=self.labels,
            mu=self.mu - self.mu.mean(),
            vcov=centering @ self.vcov @ centering,
            phi=self.phi,
            m=self.m,
            loglik=self.loglik,
            converged=self.converged,
            iterations=self.iterations,
            score_norm=self.score_norm,
            constraint="sum",
        )


@dataclass(frozen=True)
class SimulationEnvelope:
    """Pointwise band for sorted journal residuals under the fitted model."""

    level: float
    lower: npt.NDArray[np.float64]
    upper: npt.NDArray[np.float64]
    median: npt.NDArray[np.float64]
    n_sim: int
    n_failed: int
    seed: int

    def __post_init__(self) -> None:
        for name in ("lower", "upper", "median"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))

    def inside(self, sorted_residuals: npt.ArrayLike) -> npt.NDArray[np.bool_]:
        r = np.asarray(sorted_residuals, dtype=np.float64)
        return (r >= self.lower) & (r <= self.upper)


@dataclass(frozen=True)
class ResidualReport:
    """Pearson residuals, journal residuals and an optional envelope."""

    labels: Tuple[str, ...]
    pearson: Dict[Tuple[int, int], float]
    journal_residuals: npt.NDArray[np.float64]
    envelope: Optional[SimulationEnvelope] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "journal_residuals", _readonly(self.journal_residuals))

    def outliers(self, threshold: float = 1.96) -> List[str]:
        r = self.journal_residuals
        return [self.labels[k] for k in np.flatnonzero(np.abs(r) > threshold)]


@dataclass(frozen=True)
class QuasiVarianceSet:
    """Quasi-variances with their approximation errors."""

    labels: Tuple[str, ...]
    qvar: npt.NDArray[np.float64]
    worst_rel_error: float
    per_pair_rel_error: Dict[Tuple[int, int], float]
    initial_objective: float
    final_objective: float
    excluded_pairs: List[Tuple[int, int]] = field(default_factory=list)

    def __post_init__(self) -> None:
        object.__setattr__(self, "qvar", _readonly(self.qvar))

    @property
    def qse(self) -> npt.NDArray[np.float64]:
        return np.sqrt(self.qvar)
