"""
Custom exceptions for citex.
"""
from typing import List, Optional, Sequence


class CitexError(Exception):
    """Base exception for citex operations."""
    pass


class InvalidParameterError(CitexError, ValueError):
    """Raised when a numeric parameter is outside its valid range."""
    pass


# Corpus

class CorpusError(CitexError):
    """Raised when citation data cannot be loaded or addressed."""
    pass


class MatrixFormatError(CorpusError):
    """Raised when a matrix file is malformed."""
    pass


class UnknownJournalError(CorpusError):
    """Raised when a journal key is not part of the corpus."""

    def __init__(self, key: str):
        self.key = key
        super().__init__(f"Unknown journal: {key}")


class AmbiguousJournalNameError(CorpusError):
    """Raised when a raw name matches more than one journal."""

    def __init__(self, raw: str, candidates: Sequence[str]):
        self.raw = raw
        self.candidates: List[str] = list(candidates)
        super().__init__(
            f"Ambiguous journal name '{raw}': candidates {', '.join(self.candidates)}"
        )


# Descriptive indices

class ImpactIndexError(CitexError):
    """Raised when an impact-family index cannot be computed."""
    pass


class MissingYearDataError(ImpactIndexError):
    """Raised when a required publication year is absent."""
    pass


class ZeroDenominatorError(ImpactIndexError):
    """Raised when a journal has no citable items in the window."""
    pass


# Clustering

class ClusterError(CitexError):
    """Raised when clustering inputs are degenerate."""
    pass


class ConstantRowError(ClusterError):
    """Raised when a journal's exchange profile has zero variance."""

    def __init__(self, journal: str):
        self.journal = journal
        super().__init__(f"Exchange totals of {journal} are constant; correlation undefined")


# Estimation

class EstimationError(CitexError):
    """Raised when a model cannot be estimated."""
    pass


class DisconnectedGraphError(EstimationError):
    """Raised when the comparison graph splits into components."""

    def __init__(self, components: Sequence[Sequence[str]]):
        self.components = [list(c) for c in components]
        shown = "; ".join("{" + ", ".join(c) + "}" for c in self.components)
        super().__init__(f"Comparison graph is disconnected: {shown}")


class SeparationError(EstimationError):
    """Raised when estimates diverge because a journal wins or loses every exchange."""

    def __init__(self, journals: Sequence[str]):
        self.journals = list(journals)
        super().__init__(f"Estimates diverge (separation) for: {', '.join(self.journals)}")


class ConvergenceError(EstimationError):
    """Raised when an iterative solver stops before reaching tolerance."""

    def __init__(self, message: str, iterations: int, residual: float, bound: Optional[float] = None):
        self.iterations = iterations
        self.residual = residual
        self.bound = bound
        super().__init__(f"{message} (iterations={iterations}, residual={residual:.3e})")


class QuasiVarianceError(EstimationError):
    """Raised when quasi-variances or derived tests are undefined."""
    pass


# Assessment

class AssessmentError(CitexError):
    """Raised when assessment units cannot be scored or compared."""
    pass


class InsufficientUnitsError(AssessmentError):
    """Raised when fewer than three units pass the coverage filter."""
    pass


class DegenerateVarianceError(AssessmentError):
    """Raised when one score axis has zero variance."""
    pass
