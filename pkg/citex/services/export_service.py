"""
Service for writing result tables, workbooks and run manifests.
"""
import hashlib
import json
import logging
import math
import numbers
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

import pandas as pd
import xlsxwriter

from citex import __version__
from citex.core.constants import METHOD_DISPLAY_NAMES
from citex.schemas.manifest import RunManifest, Scalar
from citex.services.descriptives import rank_values

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def file_digest(path: Path) -> str:
    """sha256 of a file's contents."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def emit_rank_table(
    scores: Mapping[str, Mapping[str, Optional[float]]],
    journals: Optional[Sequence[str]] = None,
    include_values: bool = False,
) -> pd.DataFrame:
    """
    One row per journal, one rank column per method.

    Args:
        scores: method -> journal -> score (None when undefined)
        journals: Row order; defaults to the journals of the first method
        include_values: Also add the score columns

    Returns:
        DataFrame with columns journal, rank_<method>... in canonical method order
    """
    if not scores:
        raise ValueError("at least one method is needed for a rank table")
    methods = sorted(
        scores,
        key=lambda m: list(METHOD_DISPLAY_NAMES).index(m) if m in METHOD_DISPLAY_NAMES else len(METHOD_DISPLAY_NAMES),
    )
    if journals is None:
        journals = list(scores[methods[0]])

    table: Dict[str, List] = {"journal": list(journals)}
    for method in methods:
        values = [scores[method].get(j) for j in journals]
        if include_values:
            table[method] = values
        ranks = rank_values(values, journals)
        table[f"rank_{method}"] = pd.array(ranks, dtype="Int64")
    return pd.DataFrame(table)


class ExportService:
    """Service for writing the artifacts of one run."""

    def __init__(self, output_dir: Path, precision: int = 6):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.precision = precision
        self.written: List[str] = []

    @property
    def float_format(self) -> str:
        return f"%.{self.precision}g"

    def path_for(self, filename: str) -> Path:
        return self.output_dir / filename

    def register(self, path: Path) -> Path:
        """Record an artifact written by another service (e.g. a figure)."""
        if path.name not in self.written:
            self.written.append(path.name)
        return path

    def export_csv(self, filename: str, frame: pd.DataFrame) -> Path:
        """
        Write a table with every float at fixed significant digits.

        Args:
            filename: Target file name inside the output directory
            frame: Table to write

        Returns:
            Path to the created CSV file
        """
        output_path = self.path_for(filename)
        frame.to_csv(output_path, index=False, float_format=self.float_format, lineterminator="\n", na_rep="")
        logger.info(f"Wrote {output_path}")
        return self.register(output_path)

    def export_excel(self, filename: str, tables: Mapping[str, pd.DataFrame], summary: Mapping[str, Scalar]) -> Path:
        """
        Write a workbook with a Summary sheet and one sheet per table.

        Args:
            filename: Target .xlsx name
            tables: sheet name -> table
            summary: label -> value rows of the Summary sheet

        Returns:
            Path to the created Excel file
        """
        output_path = self.path_for(filename)
        workbook = xlsxwriter.Workbook(str(output_path))

        header_format = workbook.add_format({
            'bold': True,
            'bg_color': '#4472C4',
            'font_color': 'white',
            'border': 1,
            'align': 'center',
            'valign': 'vcenter'
        })
        cell_format = workbook.add_format({'border': 1, 'valign': 'top'})
        number_format = workbook.add_format({'border': 1, 'num_format': '0.000'})

        summary_sheet = workbook.add_worksheet("Summary")
        for row, (label, value) in enumerate(summary.items()):
            summary_sheet.write(row, 0, label, header_format)
            summary_sheet.write(row, 1, "" if value is None else str(value), cell_format)
        summary_sheet.set_column(0, 0, 24)
        summary_sheet.set_column(1, 1, 60)

        for name, frame in tables.items():
            sheet = workbook.add_worksheet(name[:31])
            for col, header in enumerate(frame.columns):
                sheet.write(0, col, str(header), header_format)
            for row, record in enumerate(frame.itertuples(index=False), start=1):
                for col, value in enumerate(record):
                    if value is None or value is pd.NA or (isinstance(value, numbers.Real) and math.isnan(value)):
                        sheet.write_blank(row, col, None, cell_format)
                    elif isinstance(value, numbers.Integral):
                        sheet.write_number(row, col, int(value), cell_format)
                    elif isinstance(value, numbers.Real):
                        sheet.write_number(row, col, float(value), number_format)
                    else:
                        sheet.write(row, col, str(value), cell_format)
            sheet.set_column(0, 0, 12)
            sheet.set_column(1, max(1, len(frame.columns) - 1), 14)

        workbook.close()
        logger.info(f"Wrote {output_path}")
        return self.register(output_path)

    def export_manifest(
        self,
        command: str,
        inputs: Iterable[Path],
        parameters: Mapping[str, Scalar],
        seed: int,
        warnings: Sequence[str] = (),
        error: Optional[str] = None,
    ) -> RunManifest:
        """Write manifest.json describing the run."""
        manifest = RunManifest(
            command=command,
            input_digests={Path(p).name: file_digest(Path(p)) for p in inputs},
            parameters=dict(sorted(parameters.items())),
            seed=seed,
            tool_version=__version__,
            timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
            artifacts=list(self.written),
            warnings=list(warnings),
            error=error,
        )
        with open(self.path_for(MANIFEST_NAME), 'w', encoding='utf-8') as f:
            json.dump(manifest.model_dump(mode="json"), f, indent=2, ensure_ascii=False)
        return manifest

