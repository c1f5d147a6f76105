"""
Immutable citation matrix types.

Rows index the cited journal and columns the citing journal, so
counts[i, j] is the number of citations from journal j to journal i.
"""
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from citex.core.constants import OTHER_KEY
from citex.core.exceptions import MatrixFormatError, UnknownJournalError
from citex.schemas.journal import Journal


def _frozen(values: npt.ArrayLike) -> npt.NDArray[np.float64]:
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class CitationMatrix:
    """Square table of directed citation counts."""

    journals: Tuple[Journal, ...]
    counts: npt.NDArray[np.float64]
    window_label: str = ""

    def __post_init__(self) -> None:
        counts = np.array(self.counts, dtype=np.float64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise MatrixFormatError(f"Citation matrix must be square, got shape {counts.shape}")
        if counts.shape[0] != len(self.journals):
            raise MatrixFormatError(
                f"Matrix dimension {counts.shape[0]} does not match {len(self.journals)} journals"
            )
        if not np.all(np.isfinite(counts)):
            raise MatrixFormatError("Citation counts must be finite")
        if np.any(counts < 0):
            row, col = np.argwhere(counts < 0)[0]
            raise MatrixFormatError(
                f"Negative count {counts[row, col]} at cited={self.journals[row].abbrev}, "
                f"citing={self.journals[col].abbrev}"
            )

        seen: Dict[str, int] = {}
        for journal in self.journals:
            if journal.abbrev in seen:
                raise MatrixFormatError(f"Duplicate journal key: {journal.abbrev}")
            seen[journal.abbrev] = len(seen)

        # ids always follow matrix positions
        journals = tuple(
            j if j.id == k else j.model_copy(update={"id": k})
            for k, j in enumerate(self.journals)
        )
        object.__setattr__(self, "journals", journals)
        object.__setattr__(self, "counts", _frozen(counts))

    @property
    def n(self) -> int:
        return len(self.journals)

    @property
    def abbrevs(self) -> List[str]:
        return [j.abbrev for j in self.journals]

    @property
    def has_other(self) -> bool:
        return OTHER_KEY in self.abbrevs

    def index_of(self, abbrev: str) -> int:
        """Position of a journal, raising UnknownJournalError if absent."""
        for journal in self.journals:
            if journal.abbrev == abbrev:
                return journal.id
        raise UnknownJournalError(abbrev)

    def count(self, cited: str, citing: str) -> float:
        """Citations from `citing` to `cited`."""
        return float(self.counts[self.index_of(cited), self.index_of(citing)])

    def without_other(self) -> "CitationMatrix":
        """Drop the reserved OTHER aggregate, if present."""
        if not self.has_other:
            return self
        keep = [k for k, a in enumerate(self.abbrevs) if a != OTHER_KEY]
        return CitationMatrix(
            journals=tuple(self.journals[k] for k in keep),
            counts=self.counts[np.ix_(keep, keep)],
            window_label=self.window_label,
        )


@dataclass(frozen=True)
class ExchangeTotals:
    """Symmetric totals t_ij = c_ij + c_ji with t_ii = c_ii."""

    labels: Tuple[str, ...]
    totals: npt.NDArray[np.float64]

    def __post_init__(self) -> None:
        object.__setattr__(self, "totals", _frozen(self.totals))


@dataclass(frozen=True)
class PairObservation:
    """Citations exchanged between journals i < j."""

    i: int
    j: int
    wins_i: float
    total: float


@dataclass(frozen=True)
class PairTable:
    """Column-oriented store of the pairs that enter Stigler fitting."""

    labels: Tuple[str, ...]
    i: npt.NDArray[np.int64]
    j: npt.NDArray[np.int64]
    wins: npt.NDArray[np.float64]
    total: npt.NDArray[np.float64]

    def __post_init__(self) -> None:
        i = np.asarray(self.i, dtype=np.int64)
        j = np.asarray(self.j, dtype=np.int64)
        wins = np.asarray(self.wins, dtype=np.float64)
        total = np.asarray(self.total, dtype=np.float64)
        if not (i.shape == j.shape == wins.shape == total.shape):
            raise MatrixFormatError("Pair arrays must have equal length")
        if np.any(i >= j):
            raise MatrixFormatError("Pairs must satisfy i < j")
        if np.any(total <= 0) or np.any(wins < 0) or np.any(wins > total):
            raise MatrixFormatError("Pairs need 0 <= wins <= total and total > 0")
        for name, value in (("i", i), ("j", j), ("wins", wins), ("total", total)):
            value = value.copy()
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def m(self) -> int:
        return int(self.i.shape[0])

    @property
    def losses(self) -> npt.NDArray[np.float64]:
        return self.total - self.wins

    @classmethod
    def from_observations(
        cls, labels: Sequence[str], observations: Sequence[PairObservation]
    ) -> "PairTable":
        """Build a table from PairObservation records, skipping empty pairs."""
        kept = [o for o in observations if o.total > 0]
        return cls(
            labels=tuple(labels),
            i=np.array([o.i for o in kept], dtype=np.int64),
            j=np.array([o.j for o in kept], dtype=np.int64),
            wins=np.array([o.wins_i for o in kept], dtype=np.float64),
            total=np.array([o.total for o in kept], dtype=np.float64),
        )

    def observations(self) -> List[PairObservation]:
        return [
            PairObservation(int(a), int(b), float(w), float(t))
            for a, b, w, t in zip(self.i, self.j, self.wins, self.total)
        ]

    def scaled(self, factor: float) -> "PairTable":
        """Multiply every count by `factor`."""
        return PairTable(self.labels, self.i, self.j, self.wins * factor, self.total * factor)
