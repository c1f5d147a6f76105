"""
Citation matrix ingestion, validation and journal-name resolution.
"""
import logging
import re
import unicodedata
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Set, Type, Union

import numpy as np
import pandas as pd

from citex.core.exceptions import (
    AmbiguousJournalNameError,
    CitexError,
    CorpusError,
    MatrixFormatError,
)
from citex.models.corpus import CitationMatrix, ExchangeTotals
from citex.models.enums import MatrixFormat, NameMatch
from citex.schemas.journal import Journal, NameResolution

logger = logging.getLogger(__name__)

PAIR_LIST_COLUMNS = ("cited", "citing", "count")

FormatLike = Union[MatrixFormat, str]


def read_table(
    path: Union[str, Path],
    required: Sequence[str] = (),
    error: Type[CitexError] = CorpusError,
    **kwargs,
) -> pd.DataFrame:
    """
    Read a UTF-8 CSV, turning parser failures into citex errors.

    Args:
        path: CSV file
        required: Columns that must be present (after stripping names)
        error: Exception class raised on failure
        **kwargs: Passed to pandas.read_csv

    Raises:
        error: If the file cannot be parsed or lacks a required column
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, encoding="utf-8", **kwargs)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        detail = (str(e).strip() or type(e).__name__).splitlines()[0]
        raise error(f"{path.name}: unreadable CSV: {detail}") from None
    if kwargs.get("header", "infer") is not None:
        frame.columns = [str(c).strip() for c in frame.columns]
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise error(f"{path.name}: missing column(s) {', '.join(missing)}")
    return frame


def _as_format(fmt: FormatLike) -> MatrixFormat:
    try:
        return MatrixFormat(fmt)
    except ValueError:
        choices = ", ".join(f.value for f in MatrixFormat)
        raise MatrixFormatError(f"Unknown matrix format '{fmt}' (expected one of: {choices})") from None


def _parse_counts(cells: pd.DataFrame, path: Path) -> np.ndarray:
    numeric = cells.apply(lambda col: pd.to_numeric(col.str.strip(), errors="coerce"))
    bad = numeric.isna().to_numpy()
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise MatrixFormatError(
            f"{path.name}: non-numeric entry '{cells.iat[row, col]}' at row {row + 2}, column {col + 2}"
        )
    return numeric.to_numpy(dtype=np.float64)


def _check_unique(keys: Sequence[str], where: str, path: Path) -> None:
    seen: Set[str] = set()
    for key in keys:
        if key in seen:
            raise MatrixFormatError(f"{path.name}: duplicate journal key '{key}' in {where}")
        seen.add(key)


def _read_matrix_csv(path: Path) -> tuple:
    raw = read_table(path, error=MatrixFormatError, header=None, dtype=str, keep_default_na=False)
    if raw.shape[0] < 2 or raw.shape[1] < 2:
        raise MatrixFormatError(f"{path.name}: needs a header row and a header column")

    citing = [c.strip() for c in raw.iloc[0, 1:].tolist()]
    cited = [c.strip() for c in raw.iloc[1:, 0].tolist()]
    _check_unique(citing, "header row", path)
    _check_unique(cited, "header column", path)
    if len(citing) != len(cited):
        raise MatrixFormatError(
            f"{path.name}: matrix is not square ({len(cited)} rows x {len(citing)} columns)"
        )
    if set(citing) != set(cited):
        missing = sorted(set(citing) ^ set(cited))
        raise MatrixFormatError(
            f"{path.name}: row and column journals differ: {', '.join(missing)}"
        )

    counts = _parse_counts(raw.iloc[1:, 1:].reset_index(drop=True), path)
    # columns follow the row order
    order = [citing.index(key) for key in cited]
    return cited, counts[:, order]


def _read_pair_list(path: Path) -> tuple:
    frame = read_table(path, PAIR_LIST_COLUMNS, MatrixFormatError, dtype=str, keep_default_na=False)

    keys: List[str] = []
    position: Dict[str, int] = {}
    for cited, citing in zip(frame["cited"], frame["citing"]):
        for key in (cited.strip(), citing.strip()):
            if not key:
                raise MatrixFormatError(f"{path.name}: blank journal key")
            if key not in position:
                position[key] = len(keys)
                keys.append(key)

    values = _parse_counts(frame[["count"]], path)[:, 0]
    counts = np.zeros((len(keys), len(keys)), dtype=np.float64)
    seen: Set[tuple] = set()
    for cited, citing, value in zip(frame["cited"], frame["citing"], values):
        pair = (position[cited.strip()], position[citing.strip()])
        if pair in seen:
            raise MatrixFormatError(f"{path.name}: duplicate pair ({cited.strip()}, {citing.strip()})")
        seen.add(pair)
        counts[pair] = value
    return keys, counts


def load_matrix(
    path: Union[str, Path],
    fmt: FormatLike = MatrixFormat.MATRIX_CSV,
    catalogue: Optional[Iterable[Journal]] = None,
    window_label: str = "",
) -> CitationMatrix:
    """
    Load and validate a citation matrix.

    Args:
        path: CSV file (rows cited, columns citing)
        fmt: matrix-csv or pair-list-csv
        catalogue: Optional journals supplying full names and aliases
        window_label: Description of the citation window

    Returns:
        Validated CitationMatrix
    """
    path = Path(path)
    fmt = _as_format(fmt)
    if not path.is_file():
        raise FileNotFoundError(f"Input file not found: {path}")

    if fmt is MatrixFormat.MATRIX_CSV:
        keys, counts = _read_matrix_csv(path)
    else:
        keys, counts = _read_pair_list(path)

    matrix = CitationMatrix(
        journals=tuple(Journal(id=k, abbrev=key) for k, key in enumerate(keys)),
        counts=counts,
        window_label=window_label,
    )
    if catalogue is not None:
        matrix = with_catalogue(matrix, catalogue)
    logger.info(f"Loaded {matrix.n} journals from {path.name} ({fmt.value})")
    return matrix


def write_matrix(C: CitationMatrix, path: Union[str, Path], fmt: FormatLike = MatrixFormat.MATRIX_CSV) -> Path:
    """Write a matrix in either supported layout; integer counts stay integers."""
    path = Path(path)
    fmt = _as_format(fmt)
    counts = C.counts
    integral = bool(np.all(counts == np.round(counts)))
    values = counts.astype(np.int64) if integral else counts

    if fmt is MatrixFormat.MATRIX_CSV:
        frame = pd.DataFrame(values, index=C.abbrevs, columns=C.abbrevs)
        frame.to_csv(path, index_label="", lineterminator="\n", float_format="%.17g")
    else:
        rows = [
            (C.abbrevs[i], C.abbrevs[j], values[i, j])
            for i in range(C.n) for j in range(C.n)
        ]
        frame = pd.DataFrame(rows, columns=list(PAIR_LIST_COLUMNS))
        frame.to_csv(path, index=False, lineterminator="\n", float_format="%.17g")
    return path


def exchange_totals(C: CitationMatrix) -> ExchangeTotals:
    """t_ij = c_ij + c_ji off the diagonal, t_ii = c_ii."""
    counts = np.asarray(C.counts)
    totals = counts + counts.T
    np.fill_diagonal(totals, np.diag(counts))
    return ExchangeTotals(labels=tuple(C.abbrevs), totals=totals)


def subset(C: CitationMatrix, keys: Sequence[str]) -> CitationMatrix:
    """Principal submatrix for `keys`, in the requested order."""
    index = [C.index_of(key) for key in keys]
    return CitationMatrix(
        journals=tuple(C.journals[k] for k in index),
        counts=C.counts[np.ix_(index, index)],
        window_label=C.window_label,
    )


def with_catalogue(C: CitationMatrix, catalogue: Iterable[Journal]) -> CitationMatrix:
    """Fill full names and aliases from a catalogue keyed by abbrev."""
    by_abbrev = {j.abbrev: j for j in catalogue}
    journals = tuple(
        j.model_copy(update={
            "full_name": by_abbrev[j.abbrev].full_name,
            "aliases": list(by_abbrev[j.abbrev].aliases),
        }) if j.abbrev in by_abbrev else j
        for j in C.journals
    )
    return CitationMatrix(journals=journals, counts=C.counts, window_label=C.window_label)


def load_journal_catalogue(path: Union[str, Path]) -> List[Journal]:
    """Read a catalogue CSV with columns abbrev,full_name."""
    frame = read_table(path, ("abbrev", "full_name"), MatrixFormatError, dtype=str, keep_default_na=False)
    _check_unique([a.strip() for a in frame["abbrev"]], "catalogue", Path(path))
    return [
        Journal(id=k, abbrev=row.abbrev.strip(), full_name=row.full_name.strip())
        for k, row in enumerate(frame.itertuples(index=False))
    ]


def load_aliases(path: Union[str, Path]) -> Dict[str, str]:
    """Read an alias table CSV with columns alias,abbrev."""
    frame = read_table(path, ("alias", "abbrev"), MatrixFormatError, dtype=str, keep_default_na=False)
    return {
        alias.strip().casefold(): abbrev.strip()
        for alias, abbrev in zip(frame["alias"], frame["abbrev"])
        if alias.strip()
    }


# Name resolution

_JOURNAL_TOKENS = {"j", "jour", "jnl", "journ"}
_SERIES_TOKENS = {"series", "ser"}
_DROPPED_TOKENS = {"the"}


def normalize_name(raw: str) -> str:
    """
    Canonical form used for journal name matching.

    Case-folds, strips accents and punctuation, expands "J." to
    "journal", treats "&" as "and" and reduces "Series B" to "B".
    """
    text = unicodedata.normalize("NFKD", raw)
    text = "".join(ch for ch in text if not unicodedata.combining(ch)).casefold()
    text = text.replace("&", " and ")
    text = re.sub(r"[^\w\s]|_", " ", text)

    tokens: List[str] = []
    words = text.split()
    for pos, word in enumerate(words):
        if word in _DROPPED_TOKENS:
            continue
        if word in _SERIES_TOKENS and pos + 1 < len(words):
            continue
        tokens.append("journal" if word in _JOURNAL_TOKENS else word)
    return " ".join(tokens)


class NameResolver:
    """
    Deterministic two-stage journal name resolution.

    An exact alias table is consulted first; otherwise names are compared
    after normalization against full names, abbreviations and aliases.
    No edit-distance matching is attempted.
    """

    def __init__(self, journals: Iterable[Journal], aliases: Optional[Dict[str, str]] = None):
        self.journals = list(journals)
        known = {j.abbrev for j in self.journals}
        self.aliases: Dict[str, str] = {}
        for alias, abbrev in (aliases or {}).items():
            if abbrev not in known:
                logger.warning(f"Alias '{alias}' points to unknown journal {abbrev}; ignored")
                continue
            self.aliases[alias.strip().casefold()] = abbrev

        self._index: Dict[str, Set[str]] = {}
        for journal in self.journals:
            names = [journal.abbrev, journal.full_name, *journal.aliases]
            for name in names:
                key = normalize_name(name) if name else ""
                if key:
                    self._index.setdefault(key, set()).add(journal.abbrev)

    def resolve(self, raw: str) -> NameResolution:
        """
        Resolve a raw journal name.

        Args:
            raw: Name as it appears in external data

        Returns:
            NameResolution; status NO_MATCH carries partial-match candidates

        Raises:
            AmbiguousJournalNameError: If two journals match equally well
        """
        alias = self.aliases.get(raw.strip().casefold())
        if alias is not None:
            return NameResolution(raw=raw, status=NameMatch.ALIAS, abbrev=alias)

        key = normalize_name(raw)
        matches = sorted(self._index.get(key, set())) if key else []
        if len(matches) > 1:
            raise AmbiguousJournalNameError(raw, matches)
        if matches:
            return NameResolution(raw=raw, status=NameMatch.NORMALIZED, abbrev=matches[0])

        return NameResolution(raw=raw, status=NameMatch.NO_MATCH, candidates=self._candidates(key))

    def _candidates(self, key: str) -> List[str]:
        words = set(key.split())
        if not words:
            return []
        found: Set[str] = set()
        for name, abbrevs in self._index.items():
            if words <= set(name.split()):
                found.update(abbrevs)
        return sorted(found)


def resolve_name(
    raw: str,
    corpus: Iterable[Journal],
    aliases: Optional[Dict[str, str]] = None,
) -> NameResolution:
    """Resolve one name against a list of journals."""
    return NameResolver(corpus, aliases).resolve(raw)


def default_catalogue() -> List[Journal]:
    """The bundled catalogue of Statistics journals."""
    from citex.config import get_settings
    return load_journal_catalogue(get_settings().data_dir / "journals.csv")


def default_aliases() -> Dict[str, str]:
    from citex.config import get_settings
    path = get_settings().data_dir / "aliases.csv"
    return load_aliases(path) if path.is_file() else {}


# Singleton instance
_name_resolver: Optional[NameResolver] = None


def get_name_resolver() -> NameResolver:
    """Get the singleton resolver over the bundled catalogue and aliases."""
    global _name_resolver
    if _name_resolver is None:
        _name_resolver = NameResolver(default_catalogue(), default_aliases())
    return _name_resolver
