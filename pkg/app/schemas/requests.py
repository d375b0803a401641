# app/schemas/requests.py - Request bodies for the HTTP API
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator

from app.schemas.reports import McConfig


class QuantumRunRequest(BaseModel):
    n_trials: int = Field(9_000_000, ge=1)
    policy: str = "uniform"
    seed: Optional[int] = None


class BellRequest(BaseModel):
    distribution: str = "GGR:1,RRG:1,GRG:1,RGR:1,GRR:2,RGG:2"
    n_trials: Optional[int] = Field(None, ge=1)
    seed: Optional[int] = None


class McRunRequest(McConfig):
    store: bool = False


class RecoverRequest(BaseModel):
    counts: List[int] = Field(..., min_length=9, max_length=9)
    n_vectors: Optional[int] = Field(None, ge=1)
    relation: Optional[str] = None


class HullRequest(BaseModel):
    """Exactly one of target (same fractions), expectations (+-1 means) or uniform_b."""

    target: Optional[List[str]] = None
    expectations: Optional[List[str]] = None
    uniform_b: Optional[str] = None

    @model_validator(mode="after")
    def _one_form(self) -> "HullRequest":
        given = [v for v in (self.target, self.expectations, self.uniform_b) if v is not None]
        if len(given) != 1:
            raise ValueError("Give exactly one of target, expectations or uniform_b")
        return self
