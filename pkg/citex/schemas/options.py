"""
Pydantic schema for the options of one CLI run.
"""
from pathlib import Path
from pydantic import BaseModel, Field, field_validator
from typing import List, Optional, Tuple

from citex.models.enums import (
    ImpactIndex,
    MatrixFormat,
    RaeScoring,
    ScoreTransform,
    Statistic,
)


class RunOptions(BaseModel):
    """Options shared by the subcommands; unused ones are ignored."""
    input: Optional[Path] = Field(None, description="Citation matrix file")
    out: Path = Field(..., description="Output directory")
    format: MatrixFormat = MatrixFormat.MATRIX_CSV
    window: str = Field("", description="Citation window label")
    constraint: str = "sum"
    damping: float = Field(0.85, ge=0, lt=1)
    tol: Optional[float] = Field(None, gt=0)
    points: int = Field(101, ge=2)
    seed: int = 20100101
    cut: float = Field(0.6, ge=0)
    ztest: Optional[Tuple[str, str]] = None
    qvar: bool = False
    simulations: int = Field(0, ge=0)
    level: float = Field(0.95, gt=0, lt=1)
    workers: int = Field(4, ge=1)
    articles: Optional[Path] = None
    stat_keys: Optional[List[str]] = None
    kind: ImpactIndex = ImpactIndex.IF
    yearly: Optional[Path] = None
    year: Optional[int] = None
    scores: Optional[Path] = None
    score_columns: Optional[List[str]] = None
    outputs: Optional[Path] = None
    profiles: Optional[Path] = None
    aliases: Optional[Path] = None
    transform: Optional[ScoreTransform] = None
    statistic: Statistic = Statistic.MEAN
    scoring: RaeScoring = RaeScoring.STANDARD
    min_coverage: float = Field(0.5, ge=0, le=1)

    @field_validator("constraint")
    @classmethod
    def constraint_form(cls, value: str) -> str:
        if value != "sum" and not (value.startswith("ref:") and len(value) > 4):
            raise ValueError("constraint must be 'sum' or 'ref:ABBREV'")
        return value

    def input_files(self) -> List[Path]:
        """Files whose digests go into the manifest."""
        candidates = [self.input, self.articles, self.yearly, self.scores, self.outputs, self.profiles, self.aliases]
        return [p for p in candidates if p is not None]
