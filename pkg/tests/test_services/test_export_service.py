import json
import zipfile

import pandas as pd
import pytest

from citex import __version__
from citex.core.constants import get_method_display_name
from citex.services.export_service import ExportService, MANIFEST_NAME, emit_rank_table, file_digest


def test_single_method_ranks_follow_scores():
    table = emit_rank_table({"EF": {"A": 3.0, "B": 2.0, "C": 1.0}})
    assert list(table.columns) == ["journal", "rank_EF"]
    assert table["rank_EF"].tolist() == [1, 2, 3]


def test_methods_are_ranked_independently_in_canonical_order():
    scores = {
        "SM": {"A": -1.0, "B": 0.5, "C": 0.5},
        "IF": {"A": 2.0, "B": None, "C": 1.0},
    }
    table = emit_rank_table(scores, journals=["A", "B", "C"], include_values=True)
    assert list(table.columns) == ["journal", "IF", "rank_IF", "SM", "rank_SM"]
    assert table["rank_SM"].tolist() == [3, 1, 2]
    assert table["rank_IF"].tolist()[0] == 1
    assert pd.isna(table["rank_IF"].iloc[1])
    assert table["rank_IF"].iloc[2] == 2


def test_method_display_names():
    assert get_method_display_name("IF5") == "Five-year Impact Factor"
    assert get_method_display_name("SMgrouped") == "Stigler model grouped"
    assert get_method_display_name("custom") == "custom"


def test_empty_rank_table_rejected():
    with pytest.raises(ValueError):
        emit_rank_table({})


def test_csv_uses_six_significant_digits(tmp_path):
    service = ExportService(tmp_path / "out")
    path = service.export_csv("values.csv", pd.DataFrame({"journal": ["A", "B"], "value": [1 / 3, None]}))
    assert path.read_text(encoding="utf-8") == "journal,value\nA,0.333333\nB,\n"
    assert service.written == ["values.csv"]


def test_manifest_records_run(tmp_path):
    matrix = tmp_path / "matrix.csv"
    matrix.write_text(",A,B\nA,0,1\nB,2,0\n", encoding="utf-8")
    service = ExportService(tmp_path / "out")
    service.export_csv("table.csv", pd.DataFrame({"x": [1]}))
    manifest = service.export_manifest("stigler", [matrix], {"tol": 1e-8, "constraint": "sum"}, seed=7,
                                       warnings=["something odd"])

    on_disk = json.loads((tmp_path / "out" / MANIFEST_NAME).read_text(encoding="utf-8"))
    assert on_disk["command"] == "stigler"
    assert on_disk["input_digests"] == {"matrix.csv": file_digest(matrix)}
    assert list(on_disk["parameters"]) == ["constraint", "tol"]
    assert on_disk["seed"] == 7
    assert on_disk["tool_version"] == __version__
    assert on_disk["artifacts"] == ["table.csv"]
    assert on_disk["warnings"] == ["something odd"]
    assert on_disk["error"] is None
    assert manifest.timestamp == on_disk["timestamp"]


def test_excel_workbook_has_summary_and_tables(tmp_path):
    service = ExportService(tmp_path)
    frame = emit_rank_table({"EF": {"A": 3.0, "B": None}}, include_values=True)
    path = service.export_excel("report.xlsx", {"Ranks": frame}, {"command": "report", "phi": None})
    assert path.is_file()
    assert zipfile.is_zipfile(path)
    with zipfile.ZipFile(path) as archive:
        sheets = [n for n in archive.namelist() if n.startswith("xl/worksheets/sheet")]
    assert len(sheets) == 2
