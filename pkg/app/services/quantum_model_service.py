# app/services/quantum_model_service.py - Singlet-state statistics of the Mermin device
import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from app.config.mermin_config import SIMULATION_CONFIG
from app.core.core_types import ALL_PAIRS, Angle, Color, SettingPair
from app.core.errors import InvalidOutcomeError, InvalidRunParameterError
from app.schemas.reports import FactsReport, PairTally
from app.services.rng_service import GENERATOR_NAME, rng_service

logger = logging.getLogger(__name__)

Probability = Union[Fraction, float]


class JointOutcome(Enum):
    """(Alice, Bob) colors; member order is the inverse-CDF order."""

    RR = (Color.R, Color.R)
    RG = (Color.R, Color.G)
    GR = (Color.G, Color.R)
    GG = (Color.G, Color.G)

    @property
    def alice(self) -> Color:
        return self.value[0]

    @property
    def bob(self) -> Color:
        return self.value[1]

    @property
    def is_same(self) -> bool:
        return self.alice is self.bob

    @classmethod
    def from_colors(cls, alice: Color, bob: Color) -> "JointOutcome":
        return cls((Color(alice), Color(bob)))

    @classmethod
    def parse(cls, text: str) -> "JointOutcome":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise InvalidOutcomeError(f"Joint outcome must be one of RR, RG, GR, GG, got {text!r}")

    def __str__(self) -> str:
        return self.name


OUTCOMES: Tuple[JointOutcome, ...] = tuple(JointOutcome)

# cos^2(theta/2) is rational at these relative angles
_EXACT_COS2_HALF: Dict[int, Fraction] = {
    0: Fraction(1),
    60: Fraction(3, 4),
    90: Fraction(1, 2),
    120: Fraction(1, 4),
    180: Fraction(0),
}


@dataclass(frozen=True)
class TrialRecord:
    pair: SettingPair
    outcome: JointOutcome
    trial_index: int

    def to_dict(self) -> Dict[str, object]:
        return {"trial_index": self.trial_index, "pair": self.pair.label, "outcome": str(self.outcome)}


def _as_angle(theta: Union[Angle, int, float]) -> Tuple[Optional[int], float]:
    degrees = theta.degrees if isinstance(theta, Angle) else theta
    if float(degrees).is_integer():
        folded = Angle(int(degrees)).normalized().degrees
        return folded, float(folded)
    folded = abs(float(degrees)) % 360.0
    return None, 360.0 - folded if folded > 180.0 else folded


class QuantumModelService:
    """Closed-form singlet probabilities for coplanar detectors and a seeded sampler."""

    def cos_squared_half(self, theta: Union[Angle, int, float]) -> Probability:
        exact, degrees = _as_angle(theta)
        if exact is not None and exact in _EXACT_COS2_HALF:
            return _EXACT_COS2_HALF[exact]
        return math.cos(math.radians(degrees) / 2) ** 2

    def joint_probability(self, outcome: JointOutcome, theta: Union[Angle, int, float]) -> Probability:
        """P(RR) = P(GG) = cos^2(theta/2)/2 and P(RG) = P(GR) = sin^2(theta/2)/2."""
        c2 = self.cos_squared_half(theta)
        if outcome.is_same:
            return c2 / 2
        return (1 - c2) / 2

    def exact_probabilities(self, theta: Union[Angle, int, float]) -> Dict[JointOutcome, Probability]:
        return {outcome: self.joint_probability(outcome, theta) for outcome in OUTCOMES}

    def color_correlation(self, theta: Union[Angle, int, float]) -> Probability:
        """E[sign(Alice) * sign(Bob)] = cos(theta). R marks Alice-up but Bob-down, so spins give -cos(theta)."""
        probs = self.exact_probabilities(theta)
        return sum(p * o.alice.sign * o.bob.sign for o, p in probs.items())

    def outcome_cdf(self, theta: Union[Angle, int, float]) -> np.ndarray:
        return np.cumsum([float(p) for p in self.exact_probabilities(theta).values()])

    def _cdf_table(self) -> np.ndarray:
        return np.vstack([self.outcome_cdf(pair.theta) for pair in ALL_PAIRS])

    def sample_trial(self, pair: SettingPair, rng: np.random.Generator) -> JointOutcome:
        u = rng.random()
        cdf = self.outcome_cdf(pair.theta)
        return OUTCOMES[int(np.count_nonzero(u >= cdf[:-1]))]

    def sample_trials(self, pair: SettingPair, n: int, rng: np.random.Generator) -> np.ndarray:
        """Vectorized sample_trial; returns outcome indices into OUTCOMES."""
        cdf = self.outcome_cdf(pair.theta)
        u = rng.random(n)
        return (u[:, None] >= cdf[None, :-1]).sum(axis=1)

    def trial_records(self, pair: SettingPair, n: int, rng: np.random.Generator) -> List[TrialRecord]:
        """Per-trial export of sample_trials; trial indices run 0..n-1."""
        if n < 1:
            raise InvalidRunParameterError(f"Need at least one trial, got {n}")
        return [
            TrialRecord(pair=pair, outcome=OUTCOMES[idx], trial_index=i)
            for i, idx in enumerate(self.sample_trials(pair, n, rng))
        ]

    def run_quantum_experiment(
        self,
        n_trials: int,
        policy: Union[str, SettingPair] = "uniform",
        seed: Optional[int] = None,
        chunk_size: Optional[int] = None,
        threads: Optional[int] = None,
    ) -> FactsReport:
        """Run n_trials device trials, each at a uniformly random pair or at one fixed pair."""
        if n_trials < 1:
            raise InvalidRunParameterError(f"n_trials must be at least 1, got {n_trials}")
        fixed = self._resolve_policy(policy)
        seed = rng_service.resolve_seed(seed)
        chunk_size = chunk_size or SIMULATION_CONFIG["chunk_size"]
        cdf_table = self._cdf_table()

        def worker(rng: np.random.Generator, size: int) -> np.ndarray:
            if fixed is None:
                pair_idx = rng.integers(0, 9, size=size)
            else:
                pair_idx = np.full(size, fixed.index - 1)
            u = rng.random(size)
            outcome_idx = (u[:, None] >= cdf_table[pair_idx, :-1]).sum(axis=1)
            return np.bincount(pair_idx * 4 + outcome_idx, minlength=36)

        policy_name = "uniform" if fixed is None else f"fixed:{fixed.label}"
        logger.info(f"[LOG] Quantum run: {n_trials} trials, policy {policy_name}, seed {seed}")
        counts = rng_service.run_chunked(n_trials, seed, worker, chunk_size, threads).reshape(9, 4)
        report = FactsReport(
            source="quantum",
            n_trials=n_trials,
            seed=seed,
            generator=GENERATOR_NAME,
            chunk_size=chunk_size,
            policy=policy_name,
            pairs=[
                PairTally(pair=pair.label, rr=int(row[0]), rg=int(row[1]), gr=int(row[2]), gg=int(row[3]))
                for pair, row in zip(ALL_PAIRS, counts)
            ],
        )
        logger.info(f"[OK] Quantum run complete, case (b) same fraction {report.case_b_same_fraction}")
        return report

    @staticmethod
    def _resolve_policy(policy: Union[str, SettingPair]) -> Optional[SettingPair]:
        if isinstance(policy, SettingPair):
            return policy
        text = str(policy).strip().lower()
        if text in ("uniform", "uniform-random", ""):
            return None
        if text.startswith("fixed:"):
            text = text.split(":", 1)[1]
        return SettingPair.from_label(text)


# Create a singleton instance
quantum_model_service = QuantumModelService()


def joint_probability(outcome: JointOutcome, theta: Union[Angle, int, float]) -> Probability:
    return quantum_model_service.joint_probability(outcome, theta)


def sample_trial(pair: SettingPair, rng: np.random.Generator) -> JointOutcome:
    return quantum_model_service.sample_trial(pair, rng)


def run_quantum_experiment(n_trials: int, policy: Union[str, SettingPair] = "uniform",
                           seed: Optional[int] = None, **kwargs) -> FactsReport:
    return quantum_model_service.run_quantum_experiment(n_trials, policy, seed, **kwargs)
