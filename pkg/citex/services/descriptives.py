"""
Citation summaries and Impact-Factor family indices.
"""
import logging
import math
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from citex.core.constants import INDEX_WINDOWS, OTHER_KEY
from citex.core.exceptions import (
    CorpusError,
    ImpactIndexError,
    InvalidParameterError,
    MissingYearDataError,
    ZeroDenominatorError,
)
from citex.models.corpus import CitationMatrix
from citex.models.enums import ImpactIndex
from citex.schemas.descriptives import CitationSummary, IndexScore, YearlyCounts
from citex.services.corpus import read_table

logger = logging.getLogger(__name__)


def _share(part: float, total: float) -> Optional[float]:
    if total <= 0:
        return None
    return min(1.0, part / total)


def summarize(C_full: CitationMatrix, stat_keys: Optional[Sequence[str]] = None) -> List[CitationSummary]:
    """
    Citations made and received per journal.

    Args:
        C_full: Matrix that may carry an OTHER aggregate row/column
        stat_keys: Journals counted as in-list; defaults to every non-OTHER journal

    Returns:
        One CitationSummary per non-OTHER journal, in matrix order
    """
    if stat_keys is None:
        stat_keys = [a for a in C_full.abbrevs if a != OTHER_KEY]
    stat_index = sorted({C_full.index_of(key) for key in stat_keys})
    counts = np.asarray(C_full.counts)

    summaries = []
    for journal in C_full.journals:
        if journal.abbrev == OTHER_KEY:
            continue
        i = journal.id
        in_list = sorted(set(stat_index) | {i})
        citing = counts[:, i]
        cited = counts[i, :]
        citing_total = float(citing.sum())
        cited_total = float(cited.sum())
        if citing_total <= 0 or cited_total <= 0:
            logger.warning(f"{journal.abbrev}: zero citation total; proportions undefined")
        summaries.append(CitationSummary(
            journal=journal.abbrev,
            citing_total=citing_total,
            citing_self_prop=_share(counts[i, i], citing_total),
            citing_stat_prop=_share(float(citing[in_list].sum()), citing_total),
            cited_total=cited_total,
            cited_self_prop=_share(counts[i, i], cited_total),
            cited_stat_prop=_share(float(cited[in_list].sum()), cited_total),
        ))
    return summaries


def _window_years(census_year: int, index: ImpactIndex) -> List[int]:
    span = INDEX_WINDOWS[index.value]
    if span == 0:
        return [census_year]
    return [census_year - k for k in range(1, span + 1)]


def _require_years(values: Mapping[int, float], years: Iterable[int], what: str, journal: str) -> List[float]:
    missing = [year for year in years if year not in values]
    if missing:
        raise MissingYearDataError(
            f"{journal}: no {what} for {', '.join(str(y) for y in sorted(missing))}"
        )
    return [float(values[year]) for year in years]


def impact_family(
    y: YearlyCounts,
    index: ImpactIndex,
    self_cites_by_year: Optional[Mapping[int, float]] = None,
) -> IndexScore:
    """
    Compute one Impact-Factor family index.

    Args:
        y: Yearly citation and citable-item counts of one journal
        index: II, IF, IFno or IF5
        self_cites_by_year: Journal self-citations by publication year (IFno)

    Returns:
        IndexScore with the unrounded value

    Raises:
        MissingYearDataError: If a year of the window is absent
        ZeroDenominatorError: If the window holds no citable items
    """
    index = ImpactIndex(index)
    years = _window_years(y.census_year, index)
    items = _require_years(y.citable_items_by_year, years, "citable items", y.journal)

    if index is ImpactIndex.II:
        if y.citations_received_same_year is None:
            raise MissingYearDataError(f"{y.journal}: no citations for {y.census_year}")
        numerator = float(y.citations_received_same_year)
    else:
        numerator = sum(_require_years(y.citations_received_by_pub_year, years, "citations", y.journal))
        if index is ImpactIndex.IFNO:
            if self_cites_by_year is None:
                raise MissingYearDataError(f"{y.journal}: IFno needs self-citation counts")
            own = sum(_require_years(self_cites_by_year, years, "self-citations", y.journal))
            if own > numerator:
                raise InvalidParameterError(f"{y.journal}: self-citations exceed citations")
            numerator -= own

    denominator = sum(items)
    if denominator <= 0:
        raise ZeroDenominatorError(f"{y.journal}: no citable items in {years[-1]}-{years[0]}")
    return IndexScore(journal=y.journal, index=index, value=numerator / denominator)


def index_table(
    yearly: Iterable[YearlyCounts],
    index: ImpactIndex,
    self_cites: Optional[Mapping[str, Mapping[int, float]]] = None,
) -> List[IndexScore]:
    """Compute an index for many journals, keeping undefined values as None."""
    scores = []
    for counts in yearly:
        own = (self_cites or {}).get(counts.journal)
        try:
            scores.append(impact_family(counts, index, own))
        except ImpactIndexError as e:
            logger.warning(f"{index.value} undefined: {e}")
            scores.append(IndexScore(journal=counts.journal, index=index, value=None, note=str(e)))
    return scores


def rank_values(values: Sequence[Optional[float]], labels: Sequence[str]) -> List[Optional[int]]:
    """
    Ranks 1..n by descending value, ties broken by label.

    Undefined values (None or NaN) get no rank.
    """
    if len(values) != len(labels):
        raise InvalidParameterError("values and labels must have equal length")
    defined = [
        (k, float(v)) for k, v in enumerate(values)
        if v is not None and not math.isnan(float(v))
    ]
    order = sorted(defined, key=lambda kv: (-kv[1], labels[kv[0]]))
    ranks: List[Optional[int]] = [None] * len(values)
    for rank, (k, _) in enumerate(order, start=1):
        ranks[k] = rank
    return ranks


def _number(value: object) -> Optional[float]:
    """Numeric cell value; blanks and NaN read as None."""
    if value is None or value == "":
        return None
    number = float(value)
    return None if math.isnan(number) else number


def yearly_counts_from_records(
    records: Iterable[Mapping[str, object]], census_year: int
) -> Tuple[Dict[str, YearlyCounts], Dict[str, Dict[int, float]]]:
    """
    Build YearlyCounts from long-format records.

    Each record has journal, year, citations and citable_items, optionally
    self_citations. The census-year row's citations are the same-year
    citations used by the Immediacy Index.

    Returns:
        (yearly counts by journal, self-citations by journal and year)
    """
    citations: Dict[str, Dict[int, float]] = {}
    items: Dict[str, Dict[int, float]] = {}
    own: Dict[str, Dict[int, float]] = {}
    for record in records:
        journal = str(record["journal"]).strip()
        year = int(record["year"])
        # blank counts are left out
        for target, column in ((citations, "citations"), (items, "citable_items")):
            value = _number(record.get(column))
            cells = target.setdefault(journal, {})
            if value is not None:
                cells[year] = value
        self_citations = _number(record.get("self_citations"))
        if self_citations is not None:
            own.setdefault(journal, {})[year] = self_citations

    yearly = {}
    for journal, by_year in citations.items():
        yearly[journal] = YearlyCounts(
            journal=journal,
            census_year=census_year,
            citations_received_by_pub_year={y: c for y, c in by_year.items() if y != census_year},
            citable_items_by_year=items[journal],
            citations_received_same_year=by_year.get(census_year),
        )
    return yearly, own


YEARLY_COLUMNS = ("journal", "year", "citations", "citable_items")


def load_yearly(
    path: Union[str, Path], census_year: Optional[int] = None
) -> Tuple[Dict[str, YearlyCounts], Dict[str, Dict[int, float]]]:
    """
    Read long-format yearly counts: journal,year,citations,citable_items[,self_citations].

    Args:
        path: CSV file
        census_year: Census year; the latest year in the file when None

    Raises:
        CorpusError: If a column is missing, a year is not an integer or a count is not numeric
    """
    path = Path(path)
    frame = read_table(path, YEARLY_COLUMNS, dtype={"journal": str})
    if frame.empty:
        raise CorpusError(f"{path.name}: no yearly records")
    years = pd.to_numeric(frame["year"], errors="coerce")
    invalid = years.isna() | (years % 1 != 0)
    if invalid.any():
        row = int(np.flatnonzero(invalid.to_numpy())[0])
        raise CorpusError(f"{path.name}: year '{frame['year'].iat[row]}' at row {row + 2} is not an integer")
    frame["year"] = years.astype(int)
    for column in ("citations", "citable_items", "self_citations"):
        if column not in frame.columns:
            continue
        values = pd.to_numeric(frame[column], errors="coerce")
        bad = values.isna() & frame[column].notna()
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise CorpusError(f"{path.name}: non-numeric {column} '{frame[column].iat[row]}' at row {row + 2}")
        frame[column] = values

    year = census_year if census_year is not None else int(frame["year"].max())
    return yearly_counts_from_records(frame.to_dict(orient="records"), year)
