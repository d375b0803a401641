# app/services/analysis_service.py - Exact adjudication of the Monte Carlo tallies
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from app.core.core_types import ALL_PAIRS, CASE_A_PAIRS, CASE_B_PAIRS, PAIR_LABELS, SettingPair
from app.core.errors import HullQueryError, InconsistentTallyError, UndefinedRatioError
from app.core.published_tables import (
    PUBLISHED_TABLE_3,
    PUBLISHED_TABLE_3_N,
    PUBLISHED_TABLE_3_RELATION,
    PUBLISHED_TABLE_4,
)
from app.schemas.reports import DistributionCounts, TallyTable
from app.services.lad_monte_carlo_service import lad_monte_carlo_service
from app.services.realm_matrix_service import MATCH, G9Vector, realm_matrix_service

logger = logging.getLogger(__name__)

Number = Union[int, float, str, Fraction]


def _to_fraction(value: Number) -> Fraction:
    if isinstance(value, Fraction):
        return value
    try:
        if isinstance(value, float):
            return Fraction(repr(value))
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError, TypeError):
        raise HullQueryError(f"Not a rational number: {value!r}")


def solve_exact(matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> Tuple[str, Optional[List[Fraction]]]:
    """Gauss-Jordan elimination over the rationals.

    Returns ("unique", x), ("inconsistent", None) or ("underdetermined", None).
    """
    rows = [[Fraction(v) for v in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    n_rows, n_cols = len(rows), len(rows[0]) - 1
    pivot_row = 0
    pivots: List[int] = []
    for col in range(n_cols):
        found = next((r for r in range(pivot_row, n_rows) if rows[r][col] != 0), None)
        if found is None:
            continue
        rows[pivot_row], rows[found] = rows[found], rows[pivot_row]
        pivot = rows[pivot_row][col]
        rows[pivot_row] = [v / pivot for v in rows[pivot_row]]
        for r in range(n_rows):
            if r != pivot_row and rows[r][col] != 0:
                factor = rows[r][col]
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[pivot_row])]
        pivots.append(col)
        pivot_row += 1
        if pivot_row == n_rows:
            break
    if any(all(v == 0 for v in row[:-1]) and row[-1] != 0 for row in rows):
        return "inconsistent", None
    if len(pivots) < n_cols:
        return "underdetermined", None
    solution = [Fraction(0)] * n_cols
    for r, col in enumerate(pivots):
        solution[col] = rows[r][-1]
    return "unique", solution


@dataclass(frozen=True)
class SameDifferent:
    same: int
    different: int
    ratio: Optional[Fraction]

    @property
    def defined(self) -> bool:
        return self.ratio is not None

    def require_ratio(self) -> Fraction:
        if self.ratio is None:
            raise UndefinedRatioError("Different/Same is undefined without any G9-2, G9-3 or G9-4 vectors")
        return self.ratio

    def to_dict(self) -> Dict[str, Any]:
        return {"same": self.same, "different": self.different,
                "ratio": str(self.ratio) if self.ratio is not None else None, "defined": self.defined}


@dataclass(frozen=True)
class CaseBDecomposition:
    """Case (b) same fraction = 1/3 from two-color vectors + the excess G9-1 adds."""

    base: Fraction
    excess: Fraction
    total: Fraction

    def to_dict(self) -> Dict[str, str]:
        return {"base": str(self.base), "excess": str(self.excess), "total": str(self.total),
                "total_float": f"{float(self.total):.6f}"}


@dataclass(frozen=True)
class HullQuery:
    """Nine per-pair same-outcome fractions to test against the G9 vertices."""

    target: Tuple[Fraction, ...]

    def __post_init__(self):
        values = tuple(_to_fraction(v) for v in self.target)
        if len(values) != 9:
            raise HullQueryError(f"A hull target has nine components, got {len(values)}")
        object.__setattr__(self, "target", values)

    @classmethod
    def uniform_case_b(cls, f: Number) -> "HullQuery":
        f = _to_fraction(f)
        return cls(tuple(Fraction(1) if p in CASE_A_PAIRS else f for p in ALL_PAIRS))

    @classmethod
    def from_expectations(cls, expectations: Sequence[Number]) -> "HullQuery":
        """From +-1 expectations per pair; a -1 mean is a same-outcome fraction of 1."""
        return cls(tuple((1 - _to_fraction(e)) / 2 for e in expectations))

    @classmethod
    def from_tally(cls, t: TallyTable) -> "HullQuery":
        return cls(tuple(Fraction(c, t.n_vectors) for c in t.counts))

    @property
    def vertices(self) -> List[G9Vector]:
        return list(realm_matrix_service.matrix.columns)


@dataclass(frozen=True)
class HullVerdict:
    feasible: bool
    weights: Optional[Tuple[Fraction, ...]] = None
    affine_weights: Optional[Tuple[Fraction, ...]] = None
    certificate: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        def _fmt(ws):
            return [str(w) for w in ws] if ws is not None else None
        return {"feasible": self.feasible, "weights": _fmt(self.weights),
                "affine_weights": _fmt(self.affine_weights), "certificate": self.certificate}

    def summary(self) -> str:
        if self.feasible:
            return "feasible, w = (" + ", ".join(str(w) for w in self.weights) + ")"
        return f"infeasible, {self.certificate}"


class AnalysisService:
    """Recovers G9 distributions from tallies and checks every identity exactly."""

    def recover_distribution(self, t: TallyTable) -> DistributionCounts:
        n = t.n_vectors
        for pair in CASE_A_PAIRS:
            if t.count(pair.label) != n:
                raise InconsistentTallyError(
                    f"Inconsistent tally: case (a) pair {pair.label} has {t.count(pair.label)} of {n} -1 results"
                )
        for pair in CASE_B_PAIRS:
            if t.count(pair.label) != t.count(pair.swapped().label):
                raise InconsistentTallyError(
                    f"Inconsistent tally: pairs {pair.label} and {pair.swapped().label} differ"
                )
        c12, c13, c23 = t.count("12"), t.count("13"), t.count("23")
        twice_n1 = c12 + c13 + c23 - n
        if twice_n1 < 0 or twice_n1 % 2:
            raise InconsistentTallyError(
                f"Inconsistent tally: N1 = ({c12} + {c13} + {c23} - {n})/2 is not a non-negative integer"
            )
        n1 = twice_n1 // 2
        n2, n3, n4 = c12 - n1, c13 - n1, c23 - n1
        if min(n2, n3, n4) < 0:
            raise InconsistentTallyError(f"Inconsistent tally: negative occurrence count in ({n1}, {n2}, {n3}, {n4})")
        return DistributionCounts(n1=n1, n2=n2, n3=n3, n4=n4)

    def synthesize_tally(self, d: DistributionCounts, relation: Optional[str] = None) -> TallyTable:
        """Exact -1 counts per pair produced by d.n1..d.n4 copies of G9-1..G9-4."""
        columns = realm_matrix_service.matrix.columns
        counts = [
            sum(occ for occ, col in zip(d.as_tuple(), columns) if col.at(pair.index) == MATCH)
            for pair in ALL_PAIRS
        ]
        return TallyTable(relation=relation, n_vectors=d.n, counts=counts,
                          column_draws=d.by_label())

    def same_different_ratio(self, d: DistributionCounts) -> SameDifferent:
        two_color = d.n2 + d.n3 + d.n4
        same, different = 2 * two_color, 4 * two_color
        return SameDifferent(same=same, different=different,
                             ratio=Fraction(different, same) if same else None)

    def same_from_tally(self, t: TallyTable, d: DistributionCounts) -> int:
        """Case (b) same outcomes left after subtracting G9-1: 2(c12-N1) + 2(c13-N1) + 2(c23-N1)."""
        return sum(2 * (t.count(label) - d.n1) for label in ("12", "13", "23"))

    def decompose_case_b_fraction(self, d: DistributionCounts) -> CaseBDecomposition:
        if d.n < 1:
            raise InconsistentTallyError("Decomposition needs at least one G9 vector")
        base = Fraction(1, 3)
        excess = Fraction(2, 3) * Fraction(d.n1, d.n)
        return CaseBDecomposition(base=base, excess=excess, total=base + excess)

    def hull_membership(self, q: HullQuery) -> HullVerdict:
        """Exact convex-combination test of q.target against the four G9 fraction vectors."""
        for pair in CASE_A_PAIRS:
            if q.target[pair.index - 1] != 1:
                raise HullQueryError(
                    f"Case (a) component {pair.label} must be 1, got {q.target[pair.index - 1]}"
                )
        vertices = [v.as_fractions() for v in q.vertices]
        matrix = [[Fraction(v[i]) for v in vertices] for i in range(9)] + [[Fraction(1)] * len(vertices)]
        rhs = list(q.target) + [Fraction(1)]
        status, solution = solve_exact(matrix, rhs)

        if status == "inconsistent":
            violated = self._violated_pairs(vertices, q.target)
            return HullVerdict(
                feasible=False,
                certificate="not an affine combination of the G9 vertices; pair equations violated at "
                + ", ".join(violated),
            )
        if status != "unique":
            raise HullQueryError("G9 vertices are affinely dependent")

        weights = tuple(solution)
        negative = [(i, w) for i, w in enumerate(weights, start=1) if w < 0]
        if negative:
            i, w = negative[0]
            return HullVerdict(feasible=False, affine_weights=weights, certificate=f"w{i} = {w}")
        return HullVerdict(feasible=True, weights=weights, affine_weights=weights)

    @staticmethod
    def _violated_pairs(vertices: List[Tuple[int, ...]], target: Tuple[Fraction, ...]) -> List[str]:
        # Rows 12, 13, 23 and the normalization pin the weights uniquely
        pinned_rows = [SettingPair.from_label(label).index - 1 for label in ("12", "13", "23")]
        matrix = [[Fraction(v[r]) for v in vertices] for r in pinned_rows] + [[Fraction(1)] * len(vertices)]
        _, w = solve_exact(matrix, [target[r] for r in pinned_rows] + [Fraction(1)])
        violated = []
        for i, label in enumerate(PAIR_LABELS):
            achieved = sum(wk * v[i] for wk, v in zip(w, vertices))
            if achieved != target[i]:
                violated.append(f"{label} ({achieved} != {target[i]})")
        return violated

    def published_table_3_tally(self) -> TallyTable:
        return TallyTable(relation=PUBLISHED_TABLE_3_RELATION, n_vectors=PUBLISHED_TABLE_3_N,
                          counts=list(PUBLISHED_TABLE_3))

    def published_distribution(self, label: str) -> DistributionCounts:
        realm_matrix_service.get_relation(label)
        n1, n2, n3, n4 = PUBLISHED_TABLE_4[str(label).strip()]
        return DistributionCounts(n1=n1, n2=n2, n3=n3, n4=n4)

    def published_tally(self, label: str) -> TallyTable:
        """Exact tally implied by a published G9 distribution."""
        return self.synthesize_tally(self.published_distribution(label), relation=str(label).strip())

    def published_checks(self) -> List[Dict[str, Any]]:
        """Re-derive every identity from the published Table 3 and Table 4 counts."""
        results = []
        recovered_23 = self.recover_distribution(self.published_table_3_tally())
        for label in PUBLISHED_TABLE_4:
            d = self.published_distribution(label)
            tally = self.synthesize_tally(d, relation=label)
            ratio = self.same_different_ratio(d)
            expected = lad_monte_carlo_service.expected_column_probabilities(label)
            largest = max(d.by_label(), key=d.by_label().get)
            results.append({
                "relation": label,
                "counts": d.by_label(),
                "round_trip": self.recover_distribution(tally) == d,
                "same": ratio.same,
                "different": ratio.different,
                "ratio": str(ratio.ratio),
                "same_matches_tally_formula": self.same_from_tally(tally, d) == ratio.same,
                "case_b_fraction": str(lad_monte_carlo_service.case_b_same_fraction(tally)),
                "largest_column": largest,
                "largest_matches_model": expected[largest] == max(expected.values()),
                "g9_1_within_4_sigma": abs(d.n1 - d.n / 16) <= 4 * math.sqrt(d.n * 15 / 256),
                "matches_table_3": label != PUBLISHED_TABLE_3_RELATION or recovered_23 == d,
            })
        logger.info(f"[OK] Checked {len(results)} published G9 distributions")
        return results


# Create a singleton instance
analysis_service = AnalysisService()


def recover_distribution(t: TallyTable) -> DistributionCounts:
    return analysis_service.recover_distribution(t)


def same_different_ratio(d: DistributionCounts) -> SameDifferent:
    return analysis_service.same_different_ratio(d)


def decompose_case_b_fraction(d: DistributionCounts) -> CaseBDecomposition:
    return analysis_service.decompose_case_b_fraction(d)


def hull_membership(q: HullQuery) -> HullVerdict:
    return analysis_service.hull_membership(q)
