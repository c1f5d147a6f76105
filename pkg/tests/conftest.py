"""
Shared toy matrices and settings isolation for the test suite.
"""
from pathlib import Path
from typing import Sequence

import numpy as np
import pytest

from citex.config import get_settings
from citex.models.corpus import CitationMatrix
from citex.schemas.journal import Journal
from citex.services import corpus, ranking_lasso

# rows cited, columns citing: FIVE[i][j] = citations of journal i by journal j
FIVE_LABELS = ("A", "B", "C", "D", "E")
FIVE = [
    [30, 12, 9, 15, 4],
    [7, 25, 6, 10, 3],
    [5, 8, 20, 6, 2],
    [9, 11, 7, 40, 5],
    [2, 3, 1, 4, 10],
]


def make_matrix(labels: Sequence[str], counts) -> CitationMatrix:
    return CitationMatrix(
        journals=tuple(Journal(id=k, abbrev=label) for k, label in enumerate(labels)),
        counts=np.asarray(counts, dtype=float),
    )


def write_csv_matrix(path: Path, labels: Sequence[str], counts) -> Path:
    lines = ["," + ",".join(labels)]
    for label, row in zip(labels, counts):
        lines.append(label + "," + ",".join(str(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch, tmp_path):
    """Fresh settings and solver singletons, with no .env file in reach."""
    monkeypatch.chdir(tmp_path)
    for key in ("CITEX_OUT", "CITEX_SEED", "CITEX_FIXTURE_DIR", "CITEX_LOG_LEVEL"):
        monkeypatch.delenv(key, raising=False)
    get_settings.cache_clear()
    monkeypatch.setattr(ranking_lasso, "_ranking_lasso", None)
    monkeypatch.setattr(corpus, "_name_resolver", None)
    yield
    get_settings.cache_clear()


@pytest.fixture
def toy3() -> CitationMatrix:
    """(c12, c21, c13, c31, c23, c32) = (8, 2, 6, 4, 5, 5)."""
    return make_matrix(("A", "B", "C"), [[0, 8, 6], [2, 0, 5], [4, 5, 0]])


@pytest.fixture
def near_tie3() -> CitationMatrix:
    """A and B nearly level, both well ahead of C."""
    return make_matrix(("A", "B", "C"), [[0, 50, 80], [48, 0, 79], [20, 21, 0]])


@pytest.fixture
def perfect3() -> CitationMatrix:
    """Counts equal to their expectations under mu = (log 2, 0, -log 2)."""
    return make_matrix(("A", "B", "C"), [[0, 20, 40], [10, 0, 20], [10, 10, 0]])


@pytest.fixture
def five() -> CitationMatrix:
    return make_matrix(FIVE_LABELS, FIVE)


@pytest.fixture
def five_csv(tmp_path) -> Path:
    return write_csv_matrix(tmp_path / "five.csv", FIVE_LABELS, FIVE)
