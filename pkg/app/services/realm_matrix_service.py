# app/services/realm_matrix_service.py - G9 vectors, the realm matrix R9-4 and its functional relations
import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from app.core.core_types import ALL_PAIRS, CASE_A_PAIRS, CASE_B_PAIRS, PAIR_LABELS, SettingPair
from app.core.errors import MalformedDomainError, UnknownRelationError
from app.services.local_realism_service import ALL_INSTRUCTION_SETS, InstructionSet

logger = logging.getLogger(__name__)

MATCH = -1
MISMATCH = +1

# Column label by the case (b) pair class where the vector reads -1
_LABEL_BY_MATCHING_PAIR = {"12": "G9-2", "13": "G9-3", "23": "G9-4"}
G9_LABELS = ("G9-1", "G9-2", "G9-3", "G9-4")


@dataclass(frozen=True)
class G9Vector:
    """+-1 record of one instruction set at all nine ordered pairs (-1 = matching colors)."""

    entries: Tuple[int, ...]
    label: str = field(default="", compare=False)
    sources: Tuple[InstructionSet, ...] = field(default=(), compare=False)

    def at(self, row: int) -> int:
        """Entry at 1-based row index (the setting pair index)."""
        return self.entries[row - 1]

    def restrict(self, rows: Sequence[int]) -> Tuple[int, ...]:
        return tuple(self.at(r) for r in rows)

    def minus_rows(self) -> List[int]:
        return [i for i, v in enumerate(self.entries, start=1) if v == MATCH]

    def as_fractions(self) -> Tuple[int, ...]:
        """Same-outcome indicator per pair (1 where the entry is -1)."""
        return tuple(1 if v == MATCH else 0 for v in self.entries)


def _label_for(entries: Tuple[int, ...]) -> str:
    if all(v == MATCH for v in entries):
        return "G9-1"
    for pair in CASE_B_PAIRS:
        if entries[pair.index - 1] == MATCH and pair.label in _LABEL_BY_MATCHING_PAIR:
            return _LABEL_BY_MATCHING_PAIR[pair.label]
    raise ValueError(f"Not a G9 vector: {entries}")


@dataclass(frozen=True)
class RealmMatrixR94:
    """The four distinct G9 columns over the nine setting-pair rows."""

    columns: Tuple[G9Vector, ...]

    def column(self, label: str) -> G9Vector:
        for col in self.columns:
            if col.label == label:
                return col
        raise KeyError(f"No column {label!r} in realm matrix")

    def row(self, index: int) -> Tuple[int, ...]:
        return tuple(col.at(index) for col in self.columns)

    def rows(self) -> List[Tuple[int, ...]]:
        return [self.row(i) for i in range(1, 10)]

    def to_dict(self) -> Dict[str, Dict[str, int]]:
        return {col.label: dict(zip(PAIR_LABELS, col.entries)) for col in self.columns}


@dataclass(frozen=True)
class FunctionalRelation:
    """Two case (b) rows whose value pairs tell the four columns apart, fixing the other seven rows."""

    domain_rows: Tuple[int, int]
    codomain_rows: Tuple[int, ...]
    lookup: Dict[Tuple[int, int], G9Vector] = field(compare=False, hash=False)

    @property
    def label(self) -> str:
        return f"{self.domain_rows[0]}{self.domain_rows[1]}"

    @property
    def setting_pair_names(self) -> Tuple[str, str]:
        return tuple(SettingPair.from_index(r).label for r in self.domain_rows)

    @property
    def arrow(self) -> str:
        return f"{self.label} -> {''.join(str(r) for r in self.codomain_rows)}"

    def to_dict(self) -> Dict[str, object]:
        return {
            "label": self.label,
            "setting_pairs": list(self.setting_pair_names),
            "codomain_rows": list(self.codomain_rows),
            "lookup": {f"{a:+d},{b:+d}": col.label for (a, b), col in sorted(self.lookup.items())},
        }


class RealmMatrixService:
    """Builds Lad's realm matrix from the instruction sets and enumerates its functional relations."""

    def __init__(self):
        self._matrix: Optional[RealmMatrixR94] = None
        self._relations: Optional[List[FunctionalRelation]] = None

    def g9_vector(self, s: InstructionSet) -> G9Vector:
        s = InstructionSet.parse(s)
        entries = tuple(MATCH if s.agrees_at(p) else MISMATCH for p in ALL_PAIRS)
        sources = tuple(sorted({s, s.mirror()}, key=lambda x: x.label))
        return G9Vector(entries=entries, label=_label_for(entries), sources=sources)

    def build_realm_matrix(self) -> RealmMatrixR94:
        unique: Dict[Tuple[int, ...], G9Vector] = {}
        for s in ALL_INSTRUCTION_SETS:
            vector = self.g9_vector(s)
            if vector != self.g9_vector(s.mirror()):
                raise ValueError(f"G9 vector of {s.label} differs from that of its mirror")
            unique.setdefault(vector.entries, vector)
        if len(unique) != 4:
            raise ValueError(f"Expected 4 unique G9 vectors, found {len(unique)}")
        columns = tuple(sorted(unique.values(), key=lambda v: v.label))
        for col in columns:
            if any(col.at(p.index) != MATCH for p in CASE_A_PAIRS):
                raise ValueError(f"{col.label} does not read -1 at every case (a) row")
        return RealmMatrixR94(columns=columns)

    @property
    def matrix(self) -> RealmMatrixR94:
        if self._matrix is None:
            self._matrix = self.build_realm_matrix()
            logger.info("[OK] Realm matrix R9-4 built")
        return self._matrix

    @staticmethod
    def _distinguishes(m: RealmMatrixR94, rows: Tuple[int, int]) -> bool:
        return len({col.restrict(rows) for col in m.columns}) == len(m.columns)

    def enumerate_functional_relations(self, m: Optional[RealmMatrixR94] = None) -> List[FunctionalRelation]:
        m = m or self.matrix
        case_b_rows = [p.index for p in CASE_B_PAIRS]
        relations = []
        for rows in combinations(case_b_rows, 2):
            if not self._distinguishes(m, rows):
                continue
            relations.append(FunctionalRelation(
                domain_rows=rows,
                codomain_rows=tuple(r for r in range(1, 10) if r not in rows),
                lookup={col.restrict(rows): col for col in m.columns},
            ))
        return relations

    def excluded_row_pairs(self, m: Optional[RealmMatrixR94] = None) -> List[Tuple[int, int]]:
        m = m or self.matrix
        case_b_rows = [p.index for p in CASE_B_PAIRS]
        return [rows for rows in combinations(case_b_rows, 2) if not self._distinguishes(m, rows)]

    @property
    def relations(self) -> List[FunctionalRelation]:
        if self._relations is None:
            self._relations = self.enumerate_functional_relations(self.matrix)
        return self._relations

    def get_relation(self, label: str) -> FunctionalRelation:
        for relation in self.relations:
            if relation.label == str(label).strip():
                return relation
        known = ", ".join(r.label for r in self.relations)
        raise UnknownRelationError(f"Unknown functional relation {label!r}; expected one of {known}")

    def apply_relation(self, r: FunctionalRelation, domain_values: Tuple[int, int]) -> G9Vector:
        values = tuple(domain_values)
        if len(values) != 2 or any(v not in (MATCH, MISMATCH) for v in values):
            raise MalformedDomainError(f"Domain values must be a pair of -1/+1, got {domain_values!r}")
        return r.lookup[values]


# Create a singleton instance
realm_matrix_service = RealmMatrixService()


def g9_vector(s: InstructionSet) -> G9Vector:
    return realm_matrix_service.g9_vector(s)


def build_realm_matrix() -> RealmMatrixR94:
    return realm_matrix_service.build_realm_matrix()


def enumerate_functional_relations(m: Optional[RealmMatrixR94] = None) -> List[FunctionalRelation]:
    return realm_matrix_service.enumerate_functional_relations(m)


def apply_relation(r: FunctionalRelation, domain_values: Tuple[int, int]) -> G9Vector:
    return realm_matrix_service.apply_relation(r, domain_values)
