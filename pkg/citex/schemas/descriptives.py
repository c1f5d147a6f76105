"""
Pydantic schemas for descriptive summaries and impact indices.
"""
from pydantic import BaseModel, Field, field_validator, model_validator
from typing import Dict, Optional

from citex.models.enums import ImpactIndex


class CitationSummary(BaseModel):
    """Citations made and received by one journal.

    Proportions are None when the corresponding total is zero.
    """
    journal: str
    citing_total: float = Field(..., ge=0)
    citing_self_prop: Optional[float] = Field(None, ge=0, le=1)
    citing_stat_prop: Optional[float] = Field(None, ge=0, le=1)
    cited_total: float = Field(..., ge=0)
    cited_self_prop: Optional[float] = Field(None, ge=0, le=1)
    cited_stat_prop: Optional[float] = Field(None, ge=0, le=1)

    @model_validator(mode="after")
    def self_within_stat(self) -> "CitationSummary":
        for own, stat in (
            (self.citing_self_prop, self.citing_stat_prop),
            (self.cited_self_prop, self.cited_stat_prop),
        ):
            if own is not None and stat is not None and own > stat + 1e-12:
                raise ValueError("self-citation share cannot exceed the in-list share")
        return self


class YearlyCounts(BaseModel):
    """Per-year inputs for the Impact-Factor family."""
    journal: str
    census_year: int = Field(..., description="Year in which citations are counted")
    citations_received_by_pub_year: Dict[int, float] = Field(default_factory=dict)
    citable_items_by_year: Dict[int, float] = Field(default_factory=dict)
    citations_received_same_year: Optional[float] = Field(0, ge=0, description="None when not reported")

    @field_validator("citations_received_by_pub_year", "citable_items_by_year")
    @classmethod
    def non_negative(cls, value: Dict[int, float]) -> Dict[int, float]:
        for year, count in value.items():
            if count < 0:
                raise ValueError(f"negative count for {year}")
        return value


class IndexScore(BaseModel):
    """One impact index value; None marks an undefined value."""
    journal: str
    index: ImpactIndex
    value: Optional[float] = Field(None, ge=0)
    note: Optional[str] = None
