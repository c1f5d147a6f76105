"""
Scoring of research-assessment units from journal scores.
"""
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy.stats import pearsonr

from citex.core.exceptions import (
    AmbiguousJournalNameError,
    AssessmentError,
    DegenerateVarianceError,
    InsufficientUnitsError,
    InvalidParameterError,
)
from citex.models.enums import RaeScoring, ScoreTransform, Statistic
from citex.schemas.assessment import MethodCorrelation, OutputRecord, QualityProfile, UnitScore
from citex.services.corpus import NameResolver, read_table

logger = logging.getLogger(__name__)

MIN_UNITS = 3

SCORE_COLUMNS = ("mu_grouped", "mu", "value", "score")

# log-odds export scores; averaged after exponentiation
LOG_SCALE_COLUMNS = frozenset({"mu", "mu_grouped", "SM", "SMgrouped", "SM_grouped"})


def rae_score(p: QualityProfile, scoring: RaeScoring = RaeScoring.STANDARD) -> float:
    """Percentage at 4* plus one third of the percentage at 3*."""
    scoring = RaeScoring(scoring)
    if scoring is RaeScoring.PCT4:
        return p.pct4
    if scoring is RaeScoring.PCT3_OR_HIGHER:
        return p.pct4 + p.pct3
    return p.pct4 + p.pct3 / 3.0


def default_transform(column: str) -> ScoreTransform:
    """Exponentiate export-score columns; index values are averaged as they are."""
    return ScoreTransform.EXPONENTIATE if column in LOG_SCALE_COLUMNS else ScoreTransform.IDENTITY


def _transform(values: np.ndarray, transform: ScoreTransform) -> np.ndarray:
    if ScoreTransform(transform) is ScoreTransform.EXPONENTIATE:
        return np.exp(values)
    return values


def unit_mean_score(
    outputs: Sequence[OutputRecord],
    scores: Mapping[str, float],
    transform: ScoreTransform = ScoreTransform.EXPONENTIATE,
    statistic: Statistic = Statistic.MEAN,
) -> UnitScore:
    """
    Average transformed journal score over a unit's scored outputs.

    Unresolved outputs and outputs in unscored journals are ignored but
    still count towards n_total.
    """
    units = {o.unit for o in outputs}
    if len(units) > 1:
        raise InvalidParameterError(f"outputs span several units: {', '.join(sorted(units))}")
    unit = units.pop() if units else ""

    scored = [float(scores[o.resolved]) for o in outputs if o.resolved is not None and o.resolved in scores]
    n_total = len(outputs)
    if not scored:
        logger.warning(f"Unit {unit}: no scored outputs; mean score undefined")
        return UnitScore(unit=unit, n_scored=0, n_total=n_total, coverage_ratio=0.0, flagged=True)

    values = _transform(np.array(scored), transform)
    location = np.median(values) if Statistic(statistic) is Statistic.MEDIAN else np.mean(values)
    return UnitScore(
        unit=unit,
        mean_journal_score=float(location),
        n_scored=len(scored),
        n_total=n_total,
        coverage_ratio=len(scored) / n_total,
    )


def resolve_outputs(outputs: Iterable[OutputRecord], resolver: NameResolver) -> List[OutputRecord]:
    """Fill in `resolved` for outputs that lack it."""
    resolved = []
    unresolved = 0
    for output in outputs:
        if output.resolved is None:
            try:
                result = resolver.resolve(output.raw_journal)
            except AmbiguousJournalNameError as e:
                logger.warning(str(e))
                result = None
            if result is not None and result.resolved:
                output = output.model_copy(update={"resolved": result.abbrev})
            else:
                unresolved += 1
        resolved.append(output)
    if unresolved:
        logger.info(f"{unresolved} outputs left unresolved (not in the journal list or ambiguous)")
    return resolved


def build_unit_scores(
    profiles: Sequence[QualityProfile],
    outputs: Sequence[OutputRecord],
    scores: Mapping[str, float],
    resolver: Optional[NameResolver] = None,
    transform: ScoreTransform = ScoreTransform.EXPONENTIATE,
    statistic: Statistic = Statistic.MEAN,
    scoring: RaeScoring = RaeScoring.STANDARD,
) -> List[UnitScore]:
    """
    Join quality profiles with the unit mean journal scores.

    Returns:
        One UnitScore per profile, in profile order
    """
    if resolver is not None:
        outputs = resolve_outputs(outputs, resolver)
    by_unit: Dict[str, List[OutputRecord]] = {}
    for output in outputs:
        by_unit.setdefault(output.unit, []).append(output)

    units = []
    for profile in profiles:
        score = unit_mean_score(by_unit.get(profile.unit, []), scores, transform, statistic)
        units.append(score.model_copy(update={"unit": profile.unit, "rae_score": rae_score(profile, scoring)}))
    missing = sorted(set(by_unit) - {p.unit for p in profiles})
    if missing:
        logger.warning(f"Outputs for units without a quality profile ignored: {', '.join(missing)}")
    return units


def eligible_units(units: Iterable[UnitScore], min_coverage: float) -> List[UnitScore]:
    """Units with both scores defined and coverage at least min_coverage."""
    if not 0.0 <= min_coverage <= 1.0:
        raise InvalidParameterError(f"--min-coverage must lie in [0, 1], got {min_coverage}")
    return [
        u for u in units
        if u.rae_score is not None and u.mean_journal_score is not None and u.coverage_ratio >= min_coverage
    ]


def correlate(units: Sequence[UnitScore], min_coverage: float = 0.5) -> float:
    """
    Pearson correlation of RAE scores with mean journal scores.

    Raises:
        InsufficientUnitsError: If fewer than three units pass the coverage filter
        DegenerateVarianceError: If either score is constant
    """
    kept = eligible_units(units, min_coverage)
    if len(kept) < MIN_UNITS:
        raise InsufficientUnitsError(
            f"{len(kept)} units pass coverage {min_coverage}; at least {MIN_UNITS} needed"
        )
    x = np.array([u.mean_journal_score for u in kept])
    y = np.array([u.rae_score for u in kept])
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise DegenerateVarianceError("a score axis is constant across units")
    r = float(pearsonr(x, y)[0])
    logger.info(f"Correlation over {len(kept)} units (coverage >= {min_coverage}): {r:.4f}")
    return r


def correlate_methods(
    units_by_method: Mapping[str, Sequence[UnitScore]],
    min_coverage: float = 0.5,
) -> List[MethodCorrelation]:
    """
    One correlation per journal-scoring method.

    With a single method the errors of `correlate` propagate; with several,
    a method whose correlation is undefined gets a blank value and a warning.
    """
    rows = []
    for method, units in units_by_method.items():
        n_units = len(eligible_units(units, min_coverage))
        try:
            r: Optional[float] = correlate(units, min_coverage)
        except (InsufficientUnitsError, DegenerateVarianceError) as e:
            if len(units_by_method) == 1:
                raise
            logger.warning(f"{method}: correlation undefined: {e}")
            r = None
        rows.append(MethodCorrelation(method=method, min_coverage=min_coverage, units=n_units, pearson=r))
    return rows


# Loaders

def load_profiles(path: Union[str, Path]) -> List[QualityProfile]:
    """Read profiles CSV: unit,pct4,pct3,pct2,pct1,pctU."""
    frame = read_table(path, ("unit", "pct4", "pct3", "pct2", "pct1", "pctU"), AssessmentError, dtype={"unit": str})
    try:
        return [QualityProfile(**row) for row in frame.to_dict(orient="records")]
    except (TypeError, ValueError) as e:
        raise AssessmentError(f"{Path(path).name}: invalid quality profile: {e}") from None


def load_outputs(path: Union[str, Path]) -> List[OutputRecord]:
    """Read outputs CSV: unit,journal_raw."""
    frame = read_table(path, ("unit", "journal_raw"), AssessmentError, dtype=str, keep_default_na=False)
    return [
        OutputRecord(unit=unit, raw_journal=raw)
        for unit, raw in zip(frame["unit"], frame["journal_raw"])
        if unit.strip()
    ]


def load_score_table(
    path: Union[str, Path], columns: Optional[Sequence[str]] = None
) -> Dict[str, Dict[str, float]]:
    """
    Read one or more journal-score columns from a CSV with a journal column.

    Without `columns`, the first of mu_grouped, mu, value, score is used;
    a file holding none of them (such as a report's method_scores.csv)
    contributes every numeric column.

    Returns:
        Scores by column, then by journal; blank scores are left out
    """
    path = Path(path)
    frame = read_table(path, ("journal",), AssessmentError, dtype={"journal": str})
    if columns:
        missing = [c for c in columns if c not in frame.columns]
        if missing:
            raise AssessmentError(f"{path.name}: no score column {', '.join(missing)}")
        chosen = list(columns)
    else:
        first = next((c for c in SCORE_COLUMNS if c in frame.columns), None)
        if first is not None:
            chosen = [first]
        else:
            chosen = [c for c in frame.columns if c != "journal" and pd.api.types.is_numeric_dtype(frame[c])]
    if not chosen:
        raise AssessmentError(f"{path.name}: no score column found")

    journals = frame["journal"].astype(str).str.strip()
    table: Dict[str, Dict[str, float]] = {}
    for column in chosen:
        values = pd.to_numeric(frame[column], errors="coerce")
        table[column] = {j: float(v) for j, v in zip(journals, values) if not pd.isna(v)}
    return table


def load_scores(path: Union[str, Path], column: Optional[str] = None) -> Dict[str, float]:
    """
    Read journal scores from a CSV with a journal column.

    Without `column`, the first of mu_grouped, mu, value, score is used.
    """
    table = load_score_table(path, [column] if column else None)
    if column is None and not set(table) & set(SCORE_COLUMNS):
        raise AssessmentError(f"{Path(path).name}: no score column found")
    return next(iter(table.values()))
