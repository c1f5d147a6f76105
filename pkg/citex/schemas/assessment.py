"""
Pydantic schemas for research-assessment comparisons.
"""
from pydantic import BaseModel, Field, field_validator, model_validator
from typing import Optional

PROFILE_SUM_TOLERANCE = 0.1


class QualityProfile(BaseModel):
    """Percentages of a unit's outputs at each quality level."""
    unit: str = Field(..., min_length=1)
    pct4: float = Field(..., ge=0)
    pct3: float = Field(..., ge=0)
    pct2: float = Field(..., ge=0)
    pct1: float = Field(..., ge=0)
    pctU: float = Field(..., ge=0)

    @model_validator(mode="after")
    def sums_to_hundred(self) -> "QualityProfile":
        total = self.pct4 + self.pct3 + self.pct2 + self.pct1 + self.pctU
        if abs(total - 100.0) > PROFILE_SUM_TOLERANCE:
            raise ValueError(f"profile of {self.unit} sums to {total}, expected 100")
        return self


class OutputRecord(BaseModel):
    """One submitted research output."""
    unit: str = Field(..., min_length=1)
    raw_journal: str
    resolved: Optional[str] = None

    @field_validator("unit")
    @classmethod
    def unit_not_blank(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("unit must not be blank")
        return value.strip()


class UnitScore(BaseModel):
    """A unit's assessment score next to its mean journal score."""
    unit: str
    rae_score: Optional[float] = None
    mean_journal_score: Optional[float] = None
    n_scored: int = Field(0, ge=0)
    n_total: int = Field(0, ge=0)
    coverage_ratio: float = Field(0.0, ge=0, le=1)
    flagged: bool = False

    @model_validator(mode="after")
    def coverage_consistent(self) -> "UnitScore":
        if self.n_scored > self.n_total:
            raise ValueError("n_scored cannot exceed n_total")
        expected = self.n_scored / self.n_total if self.n_total else 0.0
        if abs(self.coverage_ratio - expected) > 1e-12:
            raise ValueError("coverage_ratio must equal n_scored / n_total")
        return self


class MethodCorrelation(BaseModel):
    """Correlation of assessment scores with one journal-scoring method."""
    method: str
    min_coverage: float = Field(..., ge=0, le=1)
    units: int = Field(..., ge=0)
    pearson: Optional[float] = None
