"""
Enumeration types for citex.
"""
from enum import Enum


class MatrixFormat(str, Enum):
    """On-disk layouts for citation matrices."""
    MATRIX_CSV = "matrix-csv"
    PAIR_LIST_CSV = "pair-list-csv"


class ImpactIndex(str, Enum):
    """Impact-Factor family indices."""
    II = "II"
    IF = "IF"
    IFNO = "IFno"
    IF5 = "IF5"


class ScoreTransform(str, Enum):
    """Transform applied to journal scores before unit averaging."""
    IDENTITY = "identity"
    EXPONENTIATE = "exponentiate"


class Statistic(str, Enum):
    """Location statistic for unit scores."""
    MEAN = "mean"
    MEDIAN = "median"


class RaeScoring(str, Enum):
    """Ways of collapsing a quality profile into one number."""
    STANDARD = "standard"  # pct4 + pct3/3
    PCT4 = "pct4"
    PCT3_OR_HIGHER = "pct3_or_higher"


class NameMatch(str, Enum):
    """Outcome of journal name resolution."""
    ALIAS = "alias"
    NORMALIZED = "normalized"
    NO_MATCH = "no_match"


class Command(str, Enum):
    """CLI subcommands."""
    DESCRIBE = "describe"
    INDEX = "index"
    CLUSTER = "cluster"
    EIGENFACTOR = "eigenfactor"
    STIGLER = "stigler"
    LASSO = "lasso"
    ASSESS = "assess"
    REPORT = "report"
