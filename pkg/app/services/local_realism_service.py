# app/services/local_realism_service.py - Instruction-set (local realism) model of the Mermin device
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from app.config.mermin_config import SIMULATION_CONFIG
from app.core.core_types import (
    ALL_PAIRS,
    CASE_A_PAIRS,
    CASE_B_PAIRS,
    Color,
    Setting,
    SettingPair,
)
from app.core.errors import InvalidDistributionError, InvalidRunParameterError
from app.schemas.reports import FactsReport, PairTally
from app.services.quantum_model_service import OUTCOMES, JointOutcome
from app.services.rng_service import GENERATOR_NAME, rng_service

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class InstructionSet:
    """Colors flashed at settings 1, 2 and 3; both particles of a pair carry the same set."""

    colors: Tuple[Color, Color, Color]

    @classmethod
    def parse(cls, text: Union[str, "InstructionSet"]) -> "InstructionSet":
        if isinstance(text, InstructionSet):
            return text
        letters = str(text).strip().upper()
        if len(letters) != 3 or any(c not in "RG" for c in letters):
            raise InvalidDistributionError(f"Instruction set must be three of R/G, got {text!r}")
        return cls(tuple(Color(c) for c in letters))

    @property
    def label(self) -> str:
        return "".join(c.value for c in self.colors)

    def respond(self, setting: Setting) -> Color:
        return self.colors[Setting.parse(setting) - 1]

    def mirror(self) -> "InstructionSet":
        return InstructionSet(tuple(c.mirror() for c in self.colors))

    @property
    def is_two_color(self) -> bool:
        return len(set(self.colors)) == 2

    @property
    def odd_setting(self) -> Optional[Setting]:
        """The setting whose color differs from the other two (None for RRR/GGG)."""
        if not self.is_two_color:
            return None
        for position, color in enumerate(self.colors):
            if self.colors.count(color) == 1:
                return Setting(position + 1)
        return None

    def agrees_at(self, pair: SettingPair) -> bool:
        return self.respond(pair.alice) is self.respond(pair.bob)

    def outcome_at(self, pair: SettingPair) -> JointOutcome:
        return JointOutcome.from_colors(self.respond(pair.alice), self.respond(pair.bob))

    def __str__(self) -> str:
        return self.label


ALL_INSTRUCTION_SETS: Tuple[InstructionSet, ...] = tuple(
    InstructionSet.parse(s) for s in ("GGR", "RRG", "GRR", "RGG", "GRG", "RGR", "GGG", "RRR")
)
TWO_COLOR_SETS: Tuple[InstructionSet, ...] = tuple(s for s in ALL_INSTRUCTION_SETS if s.is_two_color)

# OUTCOME_TABLE[set, pair] -> index into OUTCOMES
OUTCOME_TABLE = np.array(
    [[OUTCOMES.index(s.outcome_at(p)) for p in ALL_PAIRS] for s in ALL_INSTRUCTION_SETS],
    dtype=np.int64,
)


def _parse_weight(raw: Any, where: str) -> Fraction:
    try:
        weight = Fraction(str(raw).strip())
    except (ValueError, ZeroDivisionError):
        raise InvalidDistributionError(f"Weight for {where} must be an integer or rational, got {raw!r}")
    if weight < 0:
        raise InvalidDistributionError(f"Weight for {where} must be non-negative, got {raw!r}")
    return weight


@dataclass(frozen=True)
class SetDistribution:
    """Non-negative rational weights over instruction sets (raw counts are fine)."""

    weights: Dict[InstructionSet, Fraction]

    @classmethod
    def from_mapping(cls, mapping: Mapping[Any, Any]) -> "SetDistribution":
        weights: Dict[InstructionSet, Fraction] = {}
        for key, raw in mapping.items():
            s = InstructionSet.parse(key)
            weights[s] = weights.get(s, Fraction(0)) + _parse_weight(raw, s.label)
        return cls(weights)

    @classmethod
    def from_literal(cls, text: str) -> "SetDistribution":
        """Parse 'GGR:1,GRG:1,GRR:2'; weights may be integers or rationals like 1/3."""
        entries: List[Tuple[str, str]] = []
        for chunk in str(text).split(","):
            if not chunk.strip():
                continue
            if ":" not in chunk:
                raise InvalidDistributionError(f"Expected SET:weight, got {chunk.strip()!r}")
            key, raw = chunk.split(":", 1)
            entries.append((key, raw))
        if not entries:
            raise InvalidDistributionError("Distribution literal is empty")
        weights: Dict[InstructionSet, Fraction] = {}
        for key, raw in entries:
            s = InstructionSet.parse(key)
            weights[s] = weights.get(s, Fraction(0)) + _parse_weight(raw, s.label)
        return cls(weights)

    @classmethod
    def from_json(cls, payload: Union[str, Mapping[str, Any]]) -> "SetDistribution":
        if isinstance(payload, str):
            try:
                payload = json.loads(payload)
            except json.JSONDecodeError as e:
                raise InvalidDistributionError(f"Distribution JSON is malformed: {e}")
        if not isinstance(payload, Mapping):
            raise InvalidDistributionError("Distribution JSON must be an object of SET: weight")
        return cls.from_mapping(payload)

    @property
    def total(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))

    def normalized(self) -> "SetDistribution":
        total = self.total
        if total == 0:
            raise InvalidDistributionError("Distribution has no positive weight")
        return SetDistribution({s: w / total for s, w in self.weights.items() if w > 0})

    def probability(self, s: InstructionSet) -> Fraction:
        return self.normalized().weights.get(s, Fraction(0))

    def support(self) -> List[InstructionSet]:
        return [s for s in ALL_INSTRUCTION_SETS if self.weights.get(s, 0) > 0]

    def mirror(self) -> "SetDistribution":
        return SetDistribution({s.mirror(): w for s, w in self.weights.items()})

    def is_mirror_balanced(self) -> bool:
        """Each set and its mirror carry equal weight, which splits case (a) agreement evenly into RR and GG."""
        return all(self.weights.get(s, 0) == self.weights.get(s.mirror(), 0) for s in ALL_INSTRUCTION_SETS)

    def to_dict(self) -> Dict[str, str]:
        return {s.label: str(w) for s, w in sorted(self.normalized().weights.items(), key=lambda kv: kv[0].label)}


def table_2_distribution() -> SetDistribution:
    """G9-2 : G9-3 : G9-4 in ratio 1:1:2, each split evenly between a set and its mirror."""
    return SetDistribution.from_literal("GGR:1,RRG:1,GRG:1,RGR:1,GRR:2,RGG:2")


def uniform_distribution() -> SetDistribution:
    return SetDistribution({s: Fraction(1) for s in ALL_INSTRUCTION_SETS})


# Which case (b) pairs a superdeterministic source doubles, keyed by the set's odd setting
_DOUBLED_PAIRS = {
    Setting.THREE: ("23", "32"),
    Setting.TWO: ("12", "21"),
    Setting.ONE: ("13", "31"),
}


@dataclass(frozen=True)
class SuperdetScenario:
    """Instruction sets whose case (b) setting pairs are chosen with set-dependent frequencies."""

    production: Dict[InstructionSet, Fraction]
    case_b_weighting: Dict[InstructionSet, Dict[str, Fraction]] = field(default_factory=dict)

    def conditional_pair_distribution(self, s: InstructionSet) -> Dict[str, Fraction]:
        """P(pair | emitted set): 1/9 at each case (a) pair, the rest spread by the case (b) weighting."""
        case_b_mass = Fraction(len(CASE_B_PAIRS), 9)
        dist = {p.label: Fraction(1, 9) for p in CASE_A_PAIRS}
        for p in CASE_B_PAIRS:
            dist[p.label] = case_b_mass * self.case_b_weighting[s][p.label]
        return {p.label: dist[p.label] for p in ALL_PAIRS}

    def aggregate_pair_marginal(self) -> Dict[str, Fraction]:
        marginal = {p.label: Fraction(0) for p in ALL_PAIRS}
        for s, weight in self.production.items():
            for label, prob in self.conditional_pair_distribution(s).items():
                marginal[label] += weight * prob
        return marginal

    def case_b_marginal(self) -> Dict[str, Fraction]:
        """Share of case (b) mass at each case (b) pair."""
        marginal = self.aggregate_pair_marginal()
        mass = sum((marginal[p.label] for p in CASE_B_PAIRS), Fraction(0))
        return {p.label: marginal[p.label] / mass for p in CASE_B_PAIRS}

    def case_b_same_fraction(self, s: InstructionSet) -> Fraction:
        weighting = self.case_b_weighting[s]
        return sum((weighting[p.label] for p in CASE_B_PAIRS if s.agrees_at(p)), Fraction(0))

    def verify(self) -> None:
        problems: List[str] = []
        if sum(self.production.values(), Fraction(0)) != 1:
            problems.append("production weights do not sum to 1")
        for s in self.production:
            if sum(self.case_b_weighting[s].values(), Fraction(0)) != 1:
                problems.append(f"case (b) weighting of {s.label} does not sum to 1")
            if self.case_b_same_fraction(s) != Fraction(1, 4):
                problems.append(f"{s.label} agrees in {self.case_b_same_fraction(s)} of case (b), not 1/4")
        for label, prob in self.aggregate_pair_marginal().items():
            if prob != Fraction(1, 9):
                problems.append(f"pair {label} has aggregate frequency {prob}, not 1/9")
        if problems:
            raise ValueError("Superdeterministic scenario is inconsistent: " + "; ".join(problems))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "production": {s.label: str(w) for s, w in self.production.items()},
            "case_b_weighting": {
                s.label: {label: str(w) for label, w in weighting.items()}
                for s, weighting in self.case_b_weighting.items()
            },
            "aggregate_pair_marginal": {k: str(v) for k, v in self.aggregate_pair_marginal().items()},
            "case_b_same_fraction": {s.label: str(self.case_b_same_fraction(s)) for s in self.production},
        }


class LocalRealismService:
    """Mermin's instruction sets: exact mixture statistics and seeded simulations."""

    def respond(self, s: InstructionSet, setting: Setting) -> Color:
        return InstructionSet.parse(s).respond(setting)

    def case_b_agreement_fraction(self, s: InstructionSet) -> Fraction:
        s = InstructionSet.parse(s)
        return Fraction(sum(1 for p in CASE_B_PAIRS if s.agrees_at(p)), len(CASE_B_PAIRS))

    def bell_enumeration(self) -> Dict[str, Fraction]:
        return {s.label: self.case_b_agreement_fraction(s) for s in ALL_INSTRUCTION_SETS}

    def mixture_per_pair_fractions(self, d: SetDistribution) -> Tuple[Fraction, ...]:
        """Exact same-color fraction at each of the nine pairs when every set is measured equally at all pairs."""
        norm = d.normalized()
        return tuple(
            sum((w for s, w in norm.weights.items() if s.agrees_at(p)), Fraction(0))
            for p in ALL_PAIRS
        )

    def mixture_case_b_fraction(self, d: SetDistribution) -> Fraction:
        norm = d.normalized()
        return sum((w * self.case_b_agreement_fraction(s) for s, w in norm.weights.items()), Fraction(0))

    def simulate_instruction_sets(
        self,
        d: SetDistribution,
        n_trials: int,
        seed: Optional[int] = None,
        chunk_size: Optional[int] = None,
        threads: Optional[int] = None,
    ) -> FactsReport:
        """Draw a set from d and an independent uniform setting pair for every trial."""
        norm = d.normalized()
        sets = norm.support()
        probs = [float(norm.weights[s]) for s in sets]
        return self._simulate("instruction_sets", sets, probs, None, n_trials, seed, chunk_size, threads)

    def build_superdet_scenario(self) -> SuperdetScenario:
        production = {s: Fraction(1, len(TWO_COLOR_SETS)) for s in TWO_COLOR_SETS}
        weighting: Dict[InstructionSet, Dict[str, Fraction]] = {}
        for s in TWO_COLOR_SETS:
            doubled = _DOUBLED_PAIRS[s.odd_setting]
            weighting[s] = {
                p.label: Fraction(2, 8) if p.label in doubled else Fraction(1, 8) for p in CASE_B_PAIRS
            }
        scenario = SuperdetScenario(production=production, case_b_weighting=weighting)
        scenario.verify()
        return scenario

    def simulate_superdet(
        self,
        scenario: SuperdetScenario,
        n_trials: int,
        seed: Optional[int] = None,
        chunk_size: Optional[int] = None,
        threads: Optional[int] = None,
    ) -> FactsReport:
        sets = [s for s in ALL_INSTRUCTION_SETS if s in scenario.production]
        probs = [float(scenario.production[s]) for s in sets]
        cond_cdf = np.vstack([
            np.cumsum([float(v) for v in scenario.conditional_pair_distribution(s).values()])
            for s in sets
        ])
        return self._simulate("superdeterministic", sets, probs, cond_cdf, n_trials, seed, chunk_size, threads)

    def conditional_pair_frequencies(self, report: FactsReport) -> Dict[str, List[float]]:
        """Empirical P(pair | emitted set) from a simulated report."""
        if not report.source_pair_counts:
            raise InvalidDistributionError("Report carries no per-instruction-set counts")
        result = {}
        for label, counts in report.source_pair_counts.items():
            total = sum(counts)
            result[label] = [c / total if total else 0.0 for c in counts]
        return result

    def statistical_independence_gap(self, report: FactsReport) -> float:
        """Largest deviation of any P(pair | set) from 1/9; near zero under statistical independence."""
        freqs = self.conditional_pair_frequencies(report)
        return max(abs(f - 1 / 9) for row in freqs.values() for f in row)

    def _simulate(
        self,
        source: str,
        sets: Sequence[InstructionSet],
        probs: Sequence[float],
        cond_cdf: Optional[np.ndarray],
        n_trials: int,
        seed: Optional[int],
        chunk_size: Optional[int],
        threads: Optional[int],
    ) -> FactsReport:
        if n_trials < 1:
            raise InvalidRunParameterError(f"n_trials must be at least 1, got {n_trials}")
        seed = rng_service.resolve_seed(seed)
        chunk_size = chunk_size or SIMULATION_CONFIG["chunk_size"]
        k = len(sets)
        table = OUTCOME_TABLE[[ALL_INSTRUCTION_SETS.index(s) for s in sets]]
        p = np.asarray(probs, dtype=float)
        p = p / p.sum()

        def worker(rng: np.random.Generator, size: int) -> np.ndarray:
            set_idx = rng.choice(k, size=size, p=p)
            if cond_cdf is None:
                pair_idx = rng.integers(0, 9, size=size)
            else:
                u = rng.random(size)
                pair_idx = (u[:, None] >= cond_cdf[set_idx, :-1]).sum(axis=1)
            outcome_idx = table[set_idx, pair_idx]
            outcome_counts = np.bincount(pair_idx * 4 + outcome_idx, minlength=36)
            set_pair_counts = np.bincount(set_idx * 9 + pair_idx, minlength=k * 9)
            return np.concatenate([outcome_counts, set_pair_counts])

        logger.info(f"[LOG] {source} run: {n_trials} trials over {k} instruction sets, seed {seed}")
        merged = rng_service.run_chunked(n_trials, seed, worker, chunk_size, threads)
        counts = merged[:36].reshape(9, 4)
        per_set = merged[36:].reshape(k, 9)
        return FactsReport(
            source=source,
            n_trials=n_trials,
            seed=seed,
            generator=GENERATOR_NAME,
            chunk_size=chunk_size,
            policy="uniform" if cond_cdf is None else "set-dependent",
            pairs=[
                PairTally(pair=pair.label, rr=int(row[0]), rg=int(row[1]), gr=int(row[2]), gg=int(row[3]))
                for pair, row in zip(ALL_PAIRS, counts)
            ],
            source_pair_counts={s.label: [int(c) for c in row] for s, row in zip(sets, per_set)},
        )


# Create a singleton instance
local_realism_service = LocalRealismService()


def respond(s: InstructionSet, setting: Setting) -> Color:
    return local_realism_service.respond(s, setting)


def case_b_agreement_fraction(s: InstructionSet) -> Fraction:
    return local_realism_service.case_b_agreement_fraction(s)


def mixture_per_pair_fractions(d: SetDistribution) -> Tuple[Fraction, ...]:
    return local_realism_service.mixture_per_pair_fractions(d)


def mixture_case_b_fraction(d: SetDistribution) -> Fraction:
    return local_realism_service.mixture_case_b_fraction(d)


def simulate_instruction_sets(d: SetDistribution, n_trials: int, seed: Optional[int] = None, **kwargs) -> FactsReport:
    return local_realism_service.simulate_instruction_sets(d, n_trials, seed, **kwargs)


def build_superdet_scenario() -> SuperdetScenario:
    return local_realism_service.build_superdet_scenario()


def simulate_superdet(scenario: SuperdetScenario, n_trials: int, seed: Optional[int] = None, **kwargs) -> FactsReport:
    return local_realism_service.simulate_superdet(scenario, n_trials, seed, **kwargs)
