import math

import numpy as np
import pytest
from pydantic import ValidationError

from citex.core.exceptions import AssessmentError, DegenerateVarianceError, InsufficientUnitsError
from citex.models.enums import RaeScoring, ScoreTransform, Statistic
from citex.schemas.assessment import OutputRecord, QualityProfile, UnitScore
from citex.services.assess import (
    build_unit_scores,
    correlate,
    correlate_methods,
    default_transform,
    eligible_units,
    load_outputs,
    load_profiles,
    load_score_table,
    load_scores,
    rae_score,
    unit_mean_score,
)
from citex.services.corpus import get_name_resolver
from citex.services.descriptives import rank_values


def _profile(unit, pct4, pct3, pct2, pct1, pctU):
    return QualityProfile(unit=unit, pct4=pct4, pct3=pct3, pct2=pct2, pct1=pct1, pctU=pctU)


def _outputs(unit, *journals):
    return [OutputRecord(unit=unit, raw_journal=j, resolved=j) for j in journals]


def _unit(name, rae, mean, coverage=1.0):
    return UnitScore(unit=name, rae_score=rae, mean_journal_score=mean,
                     n_scored=int(coverage * 4), n_total=4, coverage_ratio=int(coverage * 4) / 4)


def test_rae_score():
    oxford = _profile("Oxford", 37.0, 49.5, 11.4, 2.1, 0.0)
    assert rae_score(oxford) == pytest.approx(53.5)
    assert rae_score(_profile("A", 100, 0, 0, 0, 0)) == 100
    assert rae_score(_profile("U", 0, 0, 0, 0, 100)) == 0
    assert rae_score(oxford, RaeScoring.PCT4) == 37.0
    assert rae_score(oxford, "pct3_or_higher") == pytest.approx(86.5)


def test_profile_must_sum_to_hundred():
    with pytest.raises(ValidationError):
        _profile("Bad", 50, 20, 10, 0, 0)
    assert _profile("Rounded", 37.0, 49.5, 11.4, 2.1, 0.05).pct4 == 37.0


def test_unit_mean_score_examples():
    assert unit_mean_score(_outputs("u", "A"), {"A": 0.0}).mean_journal_score == pytest.approx(1.0)
    two = unit_mean_score(_outputs("u", "A", "B"), {"A": 1.0, "B": -1.0})
    assert two.mean_journal_score == pytest.approx(math.cosh(1.0))
    identity = unit_mean_score(_outputs("u", "A", "B"), {"A": 2.0, "B": 4.0}, ScoreTransform.IDENTITY)
    assert identity.mean_journal_score == pytest.approx(3.0)
    median = unit_mean_score(_outputs("u", "A", "B", "C"), {"A": 1.0, "B": 2.0, "C": 9.0},
                             "identity", Statistic.MEDIAN)
    assert median.mean_journal_score == pytest.approx(2.0)


def test_unscored_outputs_count_towards_coverage(caplog):
    outputs = _outputs("u", "A", "X") + [OutputRecord(unit="u", raw_journal="Nowhere")]
    score = unit_mean_score(outputs, {"A": 0.5})
    assert (score.n_scored, score.n_total) == (1, 3)
    assert score.coverage_ratio == pytest.approx(1 / 3)
    assert not score.flagged

    empty = unit_mean_score(_outputs("u", "X"), {"A": 0.5})
    assert empty.flagged
    assert empty.mean_journal_score is None
    assert "undefined" in caplog.text


def test_exponentiated_means_keep_unit_order_under_shift():
    rng = np.random.default_rng(2)
    scores = {f"J{k}": float(v) for k, v in enumerate(rng.normal(size=6))}
    shifted = {k: v + 0.7 for k, v in scores.items()}
    units = [_outputs(f"u{k}", *rng.choice(list(scores), size=3)) for k in range(5)]
    before = [unit_mean_score(u, scores).mean_journal_score for u in units]
    after = [unit_mean_score(u, shifted).mean_journal_score for u in units]
    names = [f"u{k}" for k in range(5)]
    assert rank_values(before, names) == rank_values(after, names)
    assert np.allclose(np.array(after) / np.array(before), np.exp(0.7))


def test_coverage_does_not_grow_when_journals_drop():
    outputs = _outputs("u", "A", "B", "C", "D")
    scores = {"A": 1.0, "B": 0.0, "C": -1.0, "D": 0.5}
    previous = 1.0
    for drop in ("D", "C", "B"):
        scores.pop(drop)
        ratio = unit_mean_score(outputs, scores).coverage_ratio
        assert ratio <= previous
        previous = ratio


def test_correlate_linear_and_affine_invariance():
    units = [_unit(f"u{k}", 10.0 * k + 5, 0.5 * k + 1) for k in range(5)]
    assert correlate(units) == pytest.approx(1.0)
    anti = [_unit(f"u{k}", 50.0 - 10.0 * k, 0.5 * k + 1) for k in range(5)]
    assert correlate(anti) == pytest.approx(-1.0)

    rng = np.random.default_rng(4)
    noisy = [_unit(f"u{k}", float(rng.uniform(20, 60)), float(rng.uniform(1, 3))) for k in range(8)]
    moved = [u.model_copy(update={"rae_score": 3 * u.rae_score - 4,
                                  "mean_journal_score": 0.5 * u.mean_journal_score + 2}) for u in noisy]
    assert correlate(noisy) == pytest.approx(correlate(moved))


def test_coverage_filter_and_degenerate_inputs():
    units = [_unit("a", 40, 1.0), _unit("b", 50, 2.0), _unit("c", 60, 3.0, coverage=0.25)]
    assert [u.unit for u in eligible_units(units, 0.5)] == ["a", "b"]
    with pytest.raises(InsufficientUnitsError):
        correlate(units, 0.5)
    flat = [_unit(f"u{k}", 40, float(k)) for k in range(4)]
    with pytest.raises(DegenerateVarianceError):
        correlate(flat)


def test_build_unit_scores_resolves_names():
    profiles = [_profile("Oxford", 37.0, 49.5, 11.4, 2.1, 0.0), _profile("Empty", 10, 20, 30, 40, 0)]
    outputs = [
        OutputRecord(unit="Oxford", raw_journal="BIOMETRIKA."),
        OutputRecord(unit="Oxford", raw_journal="J Am Stat Assoc"),
        OutputRecord(unit="Oxford", raw_journal="Annals"),
        OutputRecord(unit="Elsewhere", raw_journal="Biometrika"),
    ]
    units = build_unit_scores(profiles, outputs, {"Bka": 0.0, "JASA": 0.0}, resolver=get_name_resolver())
    oxford, empty = units
    assert oxford.rae_score == pytest.approx(53.5)
    assert (oxford.n_scored, oxford.n_total) == (2, 3)
    assert oxford.mean_journal_score == pytest.approx(1.0)
    assert empty.flagged and empty.n_total == 0


def test_loaders(tmp_path):
    profiles = tmp_path / "profiles.csv"
    profiles.write_text("unit,pct4,pct3,pct2,pct1,pctU\nOxford,37.0,49.5,11.4,2.1,0\n", encoding="utf-8")
    outputs = tmp_path / "outputs.csv"
    outputs.write_text("unit,journal_raw\nOxford,Biometrika\n,ignored\n", encoding="utf-8")
    scores = tmp_path / "scores.csv"
    scores.write_text("journal,mu,mu_grouped\nBka,0.5,0.4\nJASA,,0.3\n", encoding="utf-8")

    assert load_profiles(profiles)[0].unit == "Oxford"
    assert [o.raw_journal for o in load_outputs(outputs)] == ["Biometrika"]
    assert load_scores(scores) == {"Bka": 0.4, "JASA": 0.3}
    assert load_scores(scores, "mu") == {"Bka": 0.5}
    with pytest.raises(AssessmentError):
        load_scores(scores, "rank")

    bad = tmp_path / "bad.csv"
    bad.write_text("unit,pct4,pct3,pct2,pct1,pctU\nX,90,90,0,0,0\n", encoding="utf-8")
    with pytest.raises(AssessmentError):
        load_profiles(bad)


def test_score_table_reads_every_method_column(tmp_path):
    methods = tmp_path / "method_scores.csv"
    methods.write_text(
        "journal,SM,SMgrouped,AI,IF\nBka,0.4,0.35,2.1,1.3\nJASA,0.3,0.35,,2.0\nAoS,0.5,0.5,3.0,2.5\n",
        encoding="utf-8",
    )
    table = load_score_table(methods)
    assert list(table) == ["SM", "SMgrouped", "AI", "IF"]
    assert table["AI"] == {"Bka": 2.1, "AoS": 3.0}
    assert list(load_score_table(methods, ["IF", "SM"])) == ["IF", "SM"]
    with pytest.raises(AssessmentError, match="EF"):
        load_score_table(methods, ["SM", "EF"])


def test_default_transform_exponentiates_export_scores_only():
    for column in ("mu", "mu_grouped", "SM", "SMgrouped"):
        assert default_transform(column) is ScoreTransform.EXPONENTIATE
    for column in ("II", "IF", "IFno", "IF5", "EF", "AI", "value"):
        assert default_transform(column) is ScoreTransform.IDENTITY


def test_correlate_methods_one_row_per_method():
    rising = [_unit("U1", 10, 1.0), _unit("U2", 20, 2.5), _unit("U3", 30, 2.9)]
    falling = [_unit("U1", 10, 3.0), _unit("U2", 20, 2.0), _unit("U3", 30, 1.5)]
    flat = [_unit("U1", 10, 1.0), _unit("U2", 20, 1.0), _unit("U3", 30, 1.0)]
    rows = correlate_methods({"SM": rising, "IF": falling, "II": flat}, min_coverage=0.5)
    assert [r.method for r in rows] == ["SM", "IF", "II"]
    assert rows[0].pearson == pytest.approx(correlate(rising))
    assert rows[1].pearson < 0
    assert rows[2].pearson is None
    assert all(r.units == 3 for r in rows)

    with pytest.raises(DegenerateVarianceError):
        correlate_methods({"II": flat})
