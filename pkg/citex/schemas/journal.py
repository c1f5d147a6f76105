"""
Pydantic schemas for journals and name resolution.
"""
from pydantic import BaseModel, Field, field_validator
from typing import List, Optional

from citex.models.enums import NameMatch


class Journal(BaseModel):
    """A journal in a corpus."""
    id: int = Field(0, ge=0, description="Row/column position in the matrix")
    abbrev: str = Field(..., min_length=1, description="Short unique key, e.g. JRSS-B")
    full_name: str = Field("", description="Full journal title")
    aliases: List[str] = Field(default_factory=list, description="Alternative names")

    @field_validator("abbrev")
    @classmethod
    def strip_abbrev(cls, value: str) -> str:
        value = value.strip()
        if not value:
            raise ValueError("abbrev must not be blank")
        return value


class NameResolution(BaseModel):
    """Result of resolving a raw journal name."""
    raw: str
    status: NameMatch
    abbrev: Optional[str] = None
    candidates: List[str] = Field(default_factory=list)

    @property
    def resolved(self) -> bool:
        return self.abbrev is not None
