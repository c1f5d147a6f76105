import numpy as np
import pytest
from numpy.testing import assert_array_equal

from citex.core.exceptions import (
    AmbiguousJournalNameError,
    MatrixFormatError,
    UnknownJournalError,
)
from citex.models.enums import MatrixFormat, NameMatch
from citex.schemas.journal import Journal
from citex.services.corpus import (
    NameResolver,
    default_aliases,
    default_catalogue,
    exchange_totals,
    get_name_resolver,
    load_aliases,
    load_matrix,
    normalize_name,
    resolve_name,
    subset,
    with_catalogue,
    write_matrix,
)
from tests.conftest import make_matrix, write_csv_matrix


def test_load_matrix_csv_orientation(tmp_path):
    path = write_csv_matrix(tmp_path / "m.csv", ["A", "B"], [[0, 3], [4, 0]])
    C = load_matrix(path)
    assert C.abbrevs == ["A", "B"]
    assert C.count("A", "B") == 3
    assert C.count("B", "A") == 4
    assert [j.id for j in C.journals] == [0, 1]


def test_pair_list_matches_matrix_csv(tmp_path):
    matrix = load_matrix(write_csv_matrix(tmp_path / "m.csv", ["A", "B"], [[0, 3], [4, 0]]))
    pairs = tmp_path / "p.csv"
    pairs.write_text("cited,citing,count\nA,B,3\nB,A,4\n", encoding="utf-8")
    listed = load_matrix(pairs, "pair-list-csv")
    assert listed.abbrevs == matrix.abbrevs
    assert_array_equal(listed.counts, matrix.counts)


def test_pair_list_uses_first_appearance_order(tmp_path):
    pairs = tmp_path / "p.csv"
    pairs.write_text("cited,citing,count\nZ,A,1\nA,M,2\n", encoding="utf-8")
    assert load_matrix(pairs, MatrixFormat.PAIR_LIST_CSV).abbrevs == ["Z", "A", "M"]


def test_columns_are_reordered_to_rows(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text(",B,A\nA,3,0\nB,0,4\n", encoding="utf-8")
    C = load_matrix(path)
    assert C.count("A", "B") == 3
    assert C.count("B", "A") == 4


@pytest.mark.parametrize("content", [
    ",A,B\nA,0,1\n",
    ",A,B\nA,0,-1\nB,2,0\n",
    ",A,B\nA,0,x\nB,2,0\n",
    ",A,A\nA,0,1\nA,2,0\n",
    ",A,B\nA,0,1\nC,2,0\n",
    ",A,B\nA,0,3\nB,4,0,9\n",
    "",
])
def test_malformed_matrices_are_rejected(tmp_path, content):
    path = tmp_path / "bad.csv"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(MatrixFormatError):
        load_matrix(path)


def test_unknown_format_and_missing_file(tmp_path):
    path = write_csv_matrix(tmp_path / "m.csv", ["A", "B"], [[0, 3], [4, 0]])
    with pytest.raises(MatrixFormatError, match="Unknown matrix format"):
        load_matrix(path, "tsv")
    with pytest.raises(FileNotFoundError):
        load_matrix(tmp_path / "absent.csv")


def test_duplicate_pair_in_pair_list(tmp_path):
    pairs = tmp_path / "p.csv"
    pairs.write_text("cited,citing,count\nA,B,3\nA,B,4\n", encoding="utf-8")
    with pytest.raises(MatrixFormatError, match="duplicate pair"):
        load_matrix(pairs, "pair-list-csv")


def test_matrix_is_immutable(five):
    with pytest.raises(ValueError):
        five.counts[0, 1] = 99


def test_write_then_load_keeps_integer_counts(tmp_path, five):
    for fmt in MatrixFormat:
        path = write_matrix(five, tmp_path / f"out-{fmt.value}.csv", fmt)
        again = load_matrix(path, fmt)
        assert again.abbrevs == five.abbrevs
        assert_array_equal(again.counts, five.counts)
    assert "30,12" in (tmp_path / "out-matrix-csv.csv").read_text()


def test_exchange_totals():
    C = make_matrix(["A", "B"], [[5, 3], [4, 0]])
    T = exchange_totals(C).totals
    assert T[0, 1] == T[1, 0] == 7
    assert T[0, 0] == 5
    assert_array_equal(exchange_totals(make_matrix(["A", "B"], np.zeros((2, 2)))).totals, 0)


def test_exchange_totals_ignore_direction(five):
    counts = np.asarray(five.counts)
    flipped = counts.T.copy()
    np.fill_diagonal(flipped, np.diag(counts))
    assert_array_equal(
        exchange_totals(five).totals,
        exchange_totals(make_matrix(five.abbrevs, flipped)).totals,
    )


def test_subset(five):
    assert_array_equal(subset(five, five.abbrevs).counts, five.counts)
    small = subset(five, ["D", "A", "C"])
    assert small.abbrevs == ["D", "A", "C"]
    assert small.count("A", "D") == five.count("A", "D")
    assert [j.id for j in small.journals] == [0, 1, 2]
    keys = ["B", "E"]
    full = np.asarray(exchange_totals(five).totals)
    index = [five.index_of(k) for k in keys]
    assert_array_equal(exchange_totals(subset(five, keys)).totals, full[np.ix_(index, index)])
    with pytest.raises(UnknownJournalError):
        subset(five, ["A", "Q"])


def test_without_other_drops_aggregate():
    C = make_matrix(["A", "B", "OTHER"], [[1, 2, 3], [4, 5, 6], [7, 8, 0]])
    assert C.has_other
    assert C.without_other().abbrevs == ["A", "B"]


def test_with_catalogue_fills_names():
    C = make_matrix(["Bka", "XYZ"], [[0, 1], [1, 0]])
    named = with_catalogue(C, default_catalogue())
    assert named.journals[0].full_name == "Biometrika"
    assert named.journals[1].full_name == ""


def test_normalize_name():
    assert normalize_name("J. Roy. Statist.  Soc.") == "journal roy statist soc"
    assert normalize_name("Journal of the Royal Statistical Society, Series B") == \
        normalize_name("Journal of the Royal Statistical Society B")
    assert normalize_name("Computational Statistics & Data Analysis") == \
        "computational statistics and data analysis"


@pytest.mark.parametrize("raw, expected", [
    ("Journal of the Royal Statistical Society B", "JRSS-B"),
    ("BIOMETRIKA.", "Bka"),
    ("journal of the american statistical association", "JASA"),
    ("J Am Stat Assoc", "JASA"),
])
def test_resolve_name(raw, expected):
    result = resolve_name(raw, default_catalogue(), default_aliases())
    assert result.resolved
    assert result.abbrev == expected


def test_alias_lookup_comes_first():
    resolver = NameResolver(default_catalogue(), {"applied statistics": "JRSS-C"})
    result = resolver.resolve("Applied Statistics")
    assert result.status == NameMatch.ALIAS
    assert result.abbrev == "JRSS-C"


def test_partial_name_is_no_match_with_candidates():
    result = get_name_resolver().resolve("Annals")
    assert result.status == NameMatch.NO_MATCH
    assert not result.resolved
    assert result.candidates == ["AISM", "AoS"]


def test_tie_between_journals_is_reported():
    journals = [
        Journal(id=0, abbrev="X1", full_name="Statistical Letters"),
        Journal(id=1, abbrev="X2", full_name="Statistical  letters."),
    ]
    with pytest.raises(AmbiguousJournalNameError) as info:
        resolve_name("statistical letters", journals)
    assert info.value.candidates == ["X1", "X2"]


def test_load_aliases_and_unknown_targets(tmp_path, caplog):
    path = tmp_path / "aliases.csv"
    path.write_text("alias,abbrev\nBiomka,Bka\nNowhere,NOPE\n", encoding="utf-8")
    aliases = load_aliases(path)
    assert aliases == {"biomka": "Bka", "nowhere": "NOPE"}
    resolver = NameResolver(default_catalogue(), aliases)
    assert resolver.resolve("BIOMKA").abbrev == "Bka"
    assert "NOPE" in caplog.text


def test_unreadable_tables_name_the_file(tmp_path):
    ragged = tmp_path / "ragged.csv"
    ragged.write_text(",A,B\nA,0,3\nB,4,0,9\n", encoding="utf-8")
    with pytest.raises(MatrixFormatError, match="ragged.csv: unreadable CSV"):
        load_matrix(ragged)

    aliases = tmp_path / "aliases.csv"
    aliases.write_text("name,abbrev\nBiometrika,Bka\n", encoding="utf-8")
    with pytest.raises(MatrixFormatError, match="aliases.csv: missing column"):
        load_aliases(aliases)
