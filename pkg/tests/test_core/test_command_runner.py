import json

import numpy as np
import pandas as pd
import pytest

from citex.core.command_runner import CommandRunner
from citex.core.exceptions import DisconnectedGraphError
from citex.models.enums import Command, ImpactIndex
from citex.schemas.options import RunOptions
from tests.conftest import FIVE_LABELS, write_csv_matrix


@pytest.fixture
def runner():
    return CommandRunner()


def _manifest(out):
    return json.loads((out / "manifest.json").read_text(encoding="utf-8"))


@pytest.mark.parametrize("command, extra, expected", [
    (Command.DESCRIBE, {}, ["descriptives.csv"]),
    (Command.CLUSTER, {"cut": 0.6}, ["clusters.csv", "merges.csv", "dendrogram.svg"]),
    (Command.EIGENFACTOR, {}, ["eigenfactor.csv"]),
    (Command.STIGLER, {"qvar": True, "ztest": ("A", "B")},
     ["stigler.csv", "residuals.csv", "ztest.csv", "centipede.svg"]),
    (Command.LASSO, {"points": 11}, ["lasso_path.csv", "lasso_grouped.csv", "lasso_path.svg"]),
    (Command.REPORT, {"points": 11},
     ["report.csv", "rank_table.csv", "method_scores.csv", "report.xlsx", "centipede.svg", "lasso_path.svg"]),
])
def test_matrix_commands_write_artifacts(runner, five_csv, tmp_path, command, extra, expected):
    out = tmp_path / "out"
    manifest = runner.run(command, RunOptions(input=five_csv, out=out, **extra))
    assert manifest.artifacts == expected
    for name in expected:
        assert (out / name).is_file()

    recorded = _manifest(out)
    assert recorded["command"] == command.value
    assert list(recorded["input_digests"]) == ["five.csv"]
    assert recorded["error"] is None


def test_stigler_table_columns(runner, five_csv, tmp_path):
    out = tmp_path / "out"
    runner.run(Command.STIGLER, RunOptions(input=five_csv, out=out))
    table = pd.read_csv(out / "stigler.csv")
    assert list(table.columns) == ["journal", "mu", "rank"]
    assert table["journal"].tolist() == list(FIVE_LABELS)
    assert abs(table["mu"].sum()) < 1e-4
    assert sorted(table["rank"]) == [1, 2, 3, 4, 5]
    assert any(m.startswith("phi = ") for m in runner.messages)

    runner.run(Command.STIGLER, RunOptions(input=five_csv, out=out, qvar=True))
    assert "qse" in pd.read_csv(out / "stigler.csv").columns


def test_reruns_write_identical_tables(runner, five_csv, tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"
    for out in (first, second):
        runner.run(Command.STIGLER, RunOptions(input=five_csv, out=out, simulations=19, seed=5, workers=2))
        runner.run(Command.LASSO, RunOptions(input=five_csv, out=out, points=11, seed=5))
    for name in ("stigler.csv", "residuals.csv", "envelope.csv", "lasso_path.csv", "lasso_grouped.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()
    svg = (first / "residuals_qq.svg").read_text(encoding="utf-8")
    assert "Export score" in svg and "Normal quantiles" in svg
    assert _manifest(first)["seed"] == 5


def test_lasso_path_marks_one_selected_point(runner, five_csv, tmp_path):
    out = tmp_path / "out"
    runner.run(Command.LASSO, RunOptions(input=five_csv, out=out, points=11))
    path = pd.read_csv(out / "lasso_path.csv")
    assert len(path) == 11
    assert path["selected"].sum() == 1
    assert path["s"].iloc[0] == 0
    grouped = pd.read_csv(out / "lasso_grouped.csv")
    assert list(grouped.columns) == ["journal", "mu", "mu_grouped", "group", "rank"]


def test_failed_run_records_error(runner, tmp_path):
    split = write_csv_matrix(tmp_path / "split.csv", ["A", "B", "C", "D"],
                             [[0, 3, 0, 0], [2, 0, 0, 0], [0, 0, 0, 4], [0, 0, 1, 0]])
    out = tmp_path / "out"
    with pytest.raises(DisconnectedGraphError):
        runner.run(Command.STIGLER, RunOptions(input=split, out=out))
    recorded = _manifest(out)
    assert recorded["error"]
    assert recorded["artifacts"] == []


def test_index_and_assess(runner, tmp_path):
    yearly = tmp_path / "yearly.csv"
    yearly.write_text(
        "journal,year,citations,citable_items,self_citations\n"
        "A,2010,3,30,\nA,2009,60,25,12\nA,2008,40,25,8\n"
        "B,2010,0,10,\nB,2009,10,0,1\nB,2008,5,0,0\n",
        encoding="utf-8",
    )
    out = tmp_path / "out"
    manifest = runner.run(Command.INDEX, RunOptions(yearly=yearly, out=out, kind=ImpactIndex.IFNO))
    table = pd.read_csv(out / "index_IFno.csv")
    assert table["value"].iloc[0] == pytest.approx(1.6)
    assert pd.isna(table["value"].iloc[1])
    assert any("undefined" in w for w in manifest.warnings)

    scores = tmp_path / "scores.csv"
    scores.write_text("journal,mu\nBka,0.4\nJASA,0.3\nAoS,0.5\nBcs,-0.2\n", encoding="utf-8")
    outputs = tmp_path / "outputs.csv"
    outputs.write_text(
        "unit,journal_raw\nU1,Biometrika\nU1,Annals of Statistics\nU2,Biometrics\nU2,Biometrika\n"
        "U3,Biometrics\nU3,Unheard Of Letters\n",
        encoding="utf-8",
    )
    profiles = tmp_path / "profiles.csv"
    profiles.write_text(
        "unit,pct4,pct3,pct2,pct1,pctU\nU1,40,40,20,0,0\nU2,20,50,30,0,0\nU3,10,30,40,20,0\n",
        encoding="utf-8",
    )
    runner.run(Command.ASSESS, RunOptions(scores=scores, outputs=outputs, profiles=profiles, out=out))
    units = pd.read_csv(out / "assessment.csv")
    assert units["unit"].tolist() == ["U1", "U2", "U3"]
    assert units["coverage"].tolist() == [1.0, 1.0, 0.5]
    correlation = pd.read_csv(out / "correlation.csv")
    assert correlation["units"].iloc[0] == 3
    assert correlation["pearson"].iloc[0] > 0.9


def test_report_writes_method_scores(runner, five_csv, tmp_path):
    out = tmp_path / "out"
    runner.run(Command.REPORT, RunOptions(input=five_csv, out=out, points=11))
    values = pd.read_csv(out / "method_scores.csv")
    assert list(values.columns) == ["journal", "SM", "SMgrouped"]
    report = pd.read_csv(out / "report.csv").set_index("journal")
    assert values.set_index("journal")["SM"].to_dict() == pytest.approx(report["SM"].to_dict())


def test_assess_correlates_every_method(runner, tmp_path):
    scores = tmp_path / "method_scores.csv"
    scores.write_text(
        "journal,SM,SMgrouped,IF,AI\n"
        "Bka,0.4,0.45,1.5,2.0\nJASA,0.3,0.3,2.2,1.8\nAoS,0.5,0.45,2.8,2.6\nBcs,-0.2,-0.2,1.4,0.9\n",
        encoding="utf-8",
    )
    outputs = tmp_path / "outputs.csv"
    outputs.write_text(
        "unit,journal_raw\nU1,Biometrika\nU1,Annals of Statistics\nU2,Biometrics\nU2,Biometrika\n"
        "U3,Biometrics\nU3,Unheard Of Letters\nU4,Journal of the American Statistical Association\n",
        encoding="utf-8",
    )
    profiles = tmp_path / "profiles.csv"
    profiles.write_text(
        "unit,pct4,pct3,pct2,pct1,pctU\n"
        "U1,40,40,20,0,0\nU2,20,50,30,0,0\nU3,10,30,40,20,0\nU4,25,45,30,0,0\n",
        encoding="utf-8",
    )
    out = tmp_path / "out"
    runner.run(Command.ASSESS, RunOptions(scores=scores, outputs=outputs, profiles=profiles, out=out))

    correlation = pd.read_csv(out / "correlation.csv")
    assert list(correlation.columns) == ["method", "min_coverage", "units", "pearson"]
    assert correlation["method"].tolist() == ["SM", "SMgrouped", "IF", "AI"]
    assert correlation["units"].tolist() == [4, 4, 4, 4]
    assert (out / "assessment.svg").read_text(encoding="utf-8").count("Mean journal score") == 4

    units = pd.read_csv(out / "assessment.csv")
    u1 = units[units["unit"] == "U1"].set_index("method")["mean_score"]
    assert u1["SM"] == pytest.approx((np.exp(0.4) + np.exp(0.5)) / 2, rel=1e-5)
    assert u1["IF"] == pytest.approx((1.5 + 2.8) / 2, rel=1e-5)

    runner.run(Command.ASSESS, RunOptions(scores=scores, outputs=outputs, profiles=profiles, out=out,
                                          score_columns=["IF"]))
    svg = (out / "assessment.svg").read_text(encoding="utf-8")
    assert svg.count("Mean journal score") == 1
    assert pd.read_csv(out / "correlation.csv")["method"].tolist() == ["IF"]
