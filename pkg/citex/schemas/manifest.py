"""
Pydantic schema for run manifests.
"""
from pydantic import BaseModel, Field
from typing import Dict, List, Optional, Union

Scalar = Union[str, int, float, bool, None]


class RunManifest(BaseModel):
    """Everything needed to reproduce the artifacts of one run."""
    command: str
    input_digests: Dict[str, str] = Field(default_factory=dict, description="file name -> sha256")
    parameters: Dict[str, Scalar] = Field(default_factory=dict)
    seed: int
    tool_version: str
    timestamp: str
    artifacts: List[str] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)
    error: Optional[str] = None
