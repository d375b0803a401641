# app/schemas/reports.py - Pydantic models for simulation configs and integer-valued results
from fractions import Fraction
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator

from app.core.core_types import CASE_A_PAIRS, CASE_B_PAIRS, PAIR_LABELS, SettingPair


class PairTally(BaseModel):
    """Joint outcome counts for one setting pair."""

    model_config = ConfigDict(frozen=True)

    pair: str
    rr: int = Field(0, ge=0)
    rg: int = Field(0, ge=0)
    gr: int = Field(0, ge=0)
    gg: int = Field(0, ge=0)

    @computed_field
    @property
    def n(self) -> int:
        return self.rr + self.rg + self.gr + self.gg

    @property
    def same(self) -> int:
        return self.rr + self.gg

    @computed_field
    @property
    def same_fraction(self) -> Optional[float]:
        return self.same / self.n if self.n else None


class FactsReport(BaseModel):
    """Per-pair joint outcome counts from one device run (quantum or instruction sets)."""

    model_config = ConfigDict(frozen=True)

    source: str
    n_trials: int = Field(..., ge=1)
    seed: int
    generator: str
    chunk_size: int
    policy: str
    pairs: List[PairTally]
    source_pair_counts: Optional[Dict[str, List[int]]] = None

    @model_validator(mode="after")
    def _check_counts(self) -> "FactsReport":
        if [p.pair for p in self.pairs] != list(PAIR_LABELS):
            raise ValueError("FactsReport must list the nine setting pairs in order 11..33")
        if sum(p.n for p in self.pairs) != self.n_trials:
            raise ValueError("Pair counts do not sum to n_trials")
        return self

    def tally(self, label: str) -> PairTally:
        return self.pairs[SettingPair.from_label(label).index - 1]

    def same_fraction(self, label: str) -> Optional[float]:
        return self.tally(label).same_fraction

    def pair_frequency(self, label: str) -> float:
        return self.tally(label).n / self.n_trials

    def _aggregate(self, pairs) -> Optional[float]:
        n = sum(self.tally(p.label).n for p in pairs)
        same = sum(self.tally(p.label).same for p in pairs)
        return same / n if n else None

    def exact_same_fraction(self, case_b: bool) -> Fraction:
        pairs = CASE_B_PAIRS if case_b else CASE_A_PAIRS
        n = sum(self.tally(p.label).n for p in pairs)
        same = sum(self.tally(p.label).same for p in pairs)
        return Fraction(same, n) if n else Fraction(0)

    @computed_field
    @property
    def case_a_same_fraction(self) -> Optional[float]:
        return self._aggregate(CASE_A_PAIRS)

    @computed_field
    @property
    def case_b_same_fraction(self) -> Optional[float]:
        return self._aggregate(CASE_B_PAIRS)


class McConfig(BaseModel):
    """One Monte Carlo run of G9 vectors through a functional relation."""

    model_config = ConfigDict(frozen=True)

    relation: str
    n_vectors: int = Field(1_000_000, ge=1)
    p_minus: float = Field(0.25, ge=0.0, le=1.0)
    seed: Optional[int] = None
    chunk_size: int = Field(250_000, ge=1)
    threads: int = Field(1, ge=1)


class TallyTable(BaseModel):
    """Number of -1 results per setting pair over n_vectors G9 vectors."""

    model_config = ConfigDict(frozen=True)

    relation: Optional[str] = None
    n_vectors: int = Field(..., ge=1)
    counts: List[int]
    p_minus: Optional[float] = None
    seed: Optional[int] = None
    seed_path: List[int] = Field(default_factory=list)
    generator: Optional[str] = None
    chunk_size: Optional[int] = None
    column_draws: Optional[Dict[str, int]] = None

    @field_validator("counts")
    @classmethod
    def _nine_counts(cls, value: List[int]) -> List[int]:
        if len(value) != 9:
            raise ValueError(f"A tally has nine counts, got {len(value)}")
        return value

    @model_validator(mode="after")
    def _check_bounds(self) -> "TallyTable":
        for label, count in zip(PAIR_LABELS, self.counts):
            if not 0 <= count <= self.n_vectors:
                raise ValueError(f"Count {count} at pair {label} outside [0, {self.n_vectors}]")
        return self

    def count(self, label: str) -> int:
        return self.counts[SettingPair.from_label(label).index - 1]

    def as_dict(self) -> Dict[str, int]:
        return dict(zip(PAIR_LABELS, self.counts))


class DistributionCounts(BaseModel):
    """Occurrences N1..N4 of the four unique G9 vectors."""

    model_config = ConfigDict(frozen=True)

    n1: int = Field(..., ge=0)
    n2: int = Field(..., ge=0)
    n3: int = Field(..., ge=0)
    n4: int = Field(..., ge=0)

    @computed_field
    @property
    def n(self) -> int:
        return self.n1 + self.n2 + self.n3 + self.n4

    def as_tuple(self):
        return (self.n1, self.n2, self.n3, self.n4)

    def by_label(self) -> Dict[str, int]:
        return {f"G9-{i}": v for i, v in enumerate(self.as_tuple(), start=1)}


class RunConfig(BaseModel):
    """Resolved command-line options for one CLI invocation."""

    model_config = ConfigDict(frozen=True)

    command: str
    n: Optional[int] = Field(None, ge=1)
    seed: Optional[int] = None
    relation: Optional[str] = None
    distribution: Optional[str] = None
    output_format: str = Field("text", pattern="^(csv|json|text)$")
    out_dir: Optional[str] = None
    threads: int = Field(1, ge=1)
    chunk_size: int = Field(250_000, ge=1)
    store: bool = False
