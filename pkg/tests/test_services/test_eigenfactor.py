import numpy as np
import pytest
from numpy.testing import assert_allclose

from citex.core.exceptions import ConvergenceError, CorpusError, InvalidParameterError
from citex.services.eigenfactor import (
    article_shares,
    eigenfactor_scores,
    load_article_counts,
    normalize_citations,
    transition_matrix,
)
from tests.conftest import make_matrix


def _dense_oracle(C, articles, damping=0.85):
    a = article_shares(articles)
    Ctilde, _ = normalize_citations(C, a)
    P = transition_matrix(Ctilde, a, damping)
    values, vectors = np.linalg.eig(P)
    psi = np.real(vectors[:, np.argmin(np.abs(values - 1.0))])
    psi = psi / psi.sum()
    weighted = Ctilde @ psi
    return 100.0 * weighted / weighted.sum()


def test_normalize_column():
    C = make_matrix(["A", "B", "C"], [[0, 1, 1], [2, 0, 1], [2, 3, 9]])
    Ctilde, dangling = normalize_citations(C)
    assert_allclose(Ctilde[:, 0], [0.0, 0.5, 0.5])
    assert_allclose(Ctilde.sum(axis=0), 1.0)
    assert not dangling.any()


def test_dangling_column_gets_article_shares():
    C = make_matrix(["A", "B", "C"], [[0, 0, 1], [2, 7, 1], [2, 0, 0]])
    a = np.array([0.2, 0.3, 0.5])
    Ctilde, dangling = normalize_citations(C, a)
    assert dangling.tolist() == [False, True, False]
    assert_allclose(Ctilde[:, 1], a)


def test_transition_matrix():
    Ctilde = np.array([[0.0, 1.0], [1.0, 0.0]])
    a = np.array([0.5, 0.5])
    P = transition_matrix(Ctilde, a, 0.0)
    assert_allclose(P, np.column_stack([a, a]))
    P = transition_matrix(Ctilde, a, 0.85)
    assert_allclose(P.sum(axis=0), 1.0)
    assert_allclose(P.sum(axis=1), 1.0)


def test_transition_matrix_rejects_bad_inputs():
    Ctilde = np.eye(2)
    with pytest.raises(InvalidParameterError):
        transition_matrix(Ctilde, np.array([0.5, 0.6]), 0.85)
    with pytest.raises(InvalidParameterError):
        transition_matrix(Ctilde, np.array([0.5, 0.5]), 1.0)


def test_symmetric_pair():
    result = eigenfactor_scores(make_matrix(["A", "B"], [[0, 5], [5, 0]]), {"A": 10, "B": 10})
    assert_allclose(result.ef, [50.0, 50.0])
    assert result.ai[0] == pytest.approx(result.ai[1])
    assert result.damping == 0.85


@pytest.mark.parametrize("seed", range(4))
def test_matches_dense_eigensolver(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 11))
    counts = rng.integers(0, 20, size=(n, n)).astype(float)
    articles = rng.integers(1, 50, size=n).astype(float)
    C = make_matrix([f"J{k}" for k in range(n)], counts)
    result = eigenfactor_scores(C, articles)

    assert result.psi.min() >= 0
    assert result.psi.sum() == pytest.approx(1.0, abs=1e-12)
    assert result.ef.sum() == pytest.approx(100.0, abs=1e-9)
    assert_allclose(result.ef, _dense_oracle(C, articles), atol=1e-8)

    P = transition_matrix(normalize_citations(C, result.a)[0], result.a, 0.85)
    assert np.abs(P @ result.psi - result.psi).sum() < 1e-10
    assert_allclose(100.0 * result.ai * result.a, result.ef)


def test_article_counts_move_scores_but_not_total(five):
    base = eigenfactor_scores(five, [1, 1, 1, 1, 1])
    doubled = eigenfactor_scores(five, [2, 1, 1, 1, 1])
    assert not np.allclose(base.psi, doubled.psi)
    assert doubled.ef.sum() == pytest.approx(100.0, abs=1e-9)


def test_scale_and_permutation(five):
    articles = [10, 20, 30, 40, 50]
    base = eigenfactor_scores(five, articles)
    scaled = eigenfactor_scores(make_matrix(five.abbrevs, np.asarray(five.counts) * 3), articles)
    assert_allclose(base.ef, scaled.ef, atol=1e-9)

    order = [3, 0, 4, 2, 1]
    counts = np.asarray(five.counts)[np.ix_(order, order)]
    permuted = eigenfactor_scores(
        make_matrix([five.abbrevs[k] for k in order], counts), [articles[k] for k in order]
    )
    assert_allclose(permuted.ef, base.ef[order], atol=1e-9)
    assert_allclose(permuted.ai, base.ai[order], atol=1e-9)


def test_uniform_articles_warn_and_other_is_dropped(caplog):
    C = make_matrix(["A", "B", "OTHER"], [[0, 4, 9], [3, 0, 9], [9, 9, 0]])
    result = eigenfactor_scores(C)
    assert result.labels == ("A", "B")
    assert_allclose(result.a, [0.5, 0.5])
    assert "uniform" in caplog.text


def test_zero_articles_leave_ai_undefined(five):
    result = eigenfactor_scores(five, {"A": 0, "B": 1, "C": 1, "D": 1, "E": 1})
    assert np.isnan(result.ai[0])
    assert result.ef.sum() == pytest.approx(100.0)


def test_non_convergence_reports_residual(five):
    with pytest.raises(ConvergenceError) as info:
        eigenfactor_scores(five, max_iter=1, tol=1e-300)
    assert info.value.iterations == 1
    assert info.value.residual > 0


def test_load_article_counts(tmp_path, five):
    path = tmp_path / "articles.csv"
    path.write_text("journal,articles\nA,10\nB,20\n", encoding="utf-8")
    assert load_article_counts(path) == {"A": 10.0, "B": 20.0}
    with pytest.raises(CorpusError, match="C, D, E"):
        eigenfactor_scores(five, load_article_counts(path))
