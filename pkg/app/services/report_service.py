# app/services/report_service.py - Consolidated run of every table and identity
import asyncio
import json
import logging
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from app.config.mermin_config import SIMULATION_CONFIG
from app.core.core_types import ALL_PAIRS
from app.core.published_tables import PUBLISHED_TABLE_2
from app.schemas.reports import DistributionCounts, FactsReport, TallyTable
from app.services.analysis_service import (
    CaseBDecomposition,
    HullQuery,
    HullVerdict,
    SameDifferent,
    analysis_service,
)
from app.services.lad_monte_carlo_service import lad_monte_carlo_service
from app.services.local_realism_service import (
    SuperdetScenario,
    local_realism_service,
    table_2_distribution,
)
from app.services.quantum_model_service import JointOutcome, quantum_model_service
from app.services.realm_matrix_service import FunctionalRelation, RealmMatrixR94, realm_matrix_service
from app.services.rng_service import GENERATOR_NAME, rng_service
from app.utils import table_formatter

logger = logging.getLogger(__name__)

# Sub-seed tags for the device runs; relation runs use their own labels (23..78)
QUANTUM_SEED_TAG = 100
SUPERDET_SEED_TAG = 101


@dataclass(frozen=True)
class ConsolidatedReport:
    seed: int
    n_vectors: int
    n_trials: int
    p_minus: float
    quantum: FactsReport
    quantum_exact_same: Tuple[Fraction, ...]
    bell: Dict[str, Fraction]
    table_2: Tuple[Fraction, ...]
    superdet_scenario: SuperdetScenario
    superdet: FactsReport
    superdet_independence_gap: float
    realm: RealmMatrixR94
    relations: List[FunctionalRelation]
    excluded_row_pairs: List[Tuple[int, int]]
    tallies: List[TallyTable]
    distributions: Dict[str, DistributionCounts]
    ratios: Dict[str, SameDifferent]
    decompositions: Dict[str, CaseBDecomposition]
    case_b_fractions: Dict[str, Fraction]
    hull: Dict[str, HullVerdict]
    published: List[Dict[str, Any]]
    elapsed_seconds: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "generator": GENERATOR_NAME,
            "n_vectors": self.n_vectors,
            "n_trials": self.n_trials,
            "p_minus": self.p_minus,
            "quantum": {
                "report": self.quantum.model_dump(),
                "exact_same_fraction": [str(f) for f in self.quantum_exact_same],
            },
            "bell": {label: str(f) for label, f in self.bell.items()},
            "table_2": {
                "computed": [str(f) for f in self.table_2],
                "matches_published": self.table_2 == PUBLISHED_TABLE_2,
            },
            "superdet": {
                "scenario": self.superdet_scenario.to_dict(),
                "report": self.superdet.model_dump(),
                "independence_gap": self.superdet_independence_gap,
            },
            "realm": self.realm.to_dict(),
            "relations": [r.to_dict() for r in self.relations],
            "excluded_row_pairs": [list(rows) for rows in self.excluded_row_pairs],
            "monte_carlo": [
                {
                    "tally": t.model_dump(),
                    "recovered": self.distributions[t.relation].by_label(),
                    "same_different": self.ratios[t.relation].to_dict(),
                    "decomposition": self.decompositions[t.relation].to_dict(),
                    "case_b_fraction": str(self.case_b_fractions[t.relation]),
                    "case_b_fraction_float": round(float(self.case_b_fractions[t.relation]), 6),
                }
                for t in self.tallies
            ],
            "hull": {name: verdict.to_dict() for name, verdict in self.hull.items()},
            "published_checks": self.published,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_markdown(self) -> str:
        header = [
            "# Mermin device and Lad simulation report",
            "",
            f"seed: {self.seed}  generator: {GENERATOR_NAME}  vectors per relation: {self.n_vectors}"
            f"  device trials: {self.n_trials}  p_minus: {self.p_minus}",
            "",
        ]
        sections = [
            table_formatter.markdown_block(
                "Facts 1 and 2: quantum device", table_formatter.facts_frame(self.quantum),
                f"Case (a) same fraction {self.quantum.case_a_same_fraction:.6f}, "
                f"case (b) same fraction {self.quantum.case_b_same_fraction:.6f} (exact 1/4).",
            ),
            table_formatter.markdown_block(
                "Bell bound: case (b) agreement per instruction set",
                table_formatter.records_frame([{"set": k, "agreement": str(v)} for k, v in self.bell.items()]),
            ),
            table_formatter.markdown_block(
                "Table 2: 1:1:2 mixture of G9-2, G9-3, G9-4",
                table_formatter.fractions_frame(self.table_2),
            ),
            table_formatter.markdown_block(
                "Superdeterministic source", table_formatter.facts_frame(self.superdet),
                f"Largest |P(pair | set) - 1/9| = {self.superdet_independence_gap:.6f}.",
            ),
            table_formatter.markdown_block("Table 1: realm matrix R9-4", table_formatter.realm_frame(self.realm)),
            table_formatter.markdown_block(
                "Functional relations", table_formatter.relations_frame(self.relations),
                "Excluded row pairs: " + ", ".join(f"{a}{b}" for a, b in self.excluded_row_pairs),
            ),
        ]
        for t in self.tallies:
            if t.relation == "23":
                sections.append(table_formatter.markdown_block("Table 3: relation 23 tally", table_formatter.tally_frame(t)))
        sections.append(table_formatter.markdown_block(
            "Table 4: recovered G9 distributions", table_formatter.distribution_frame(self.distributions),
        ))
        sections.append(table_formatter.markdown_block(
            "Different/Same and case (b) decomposition",
            table_formatter.records_frame([
                {
                    "relation": label,
                    "same": self.ratios[label].same,
                    "different": self.ratios[label].different,
                    "ratio": str(self.ratios[label].ratio),
                    "case_b_fraction": float(self.case_b_fractions[label]),
                    "excess": float(self.decompositions[label].excess),
                }
                for label in self.distributions
            ]),
        ))
        sections.append(table_formatter.markdown_block(
            "Convex hull of the G9 vectors",
            table_formatter.records_frame([{"point": k, "verdict": v.summary()} for k, v in self.hull.items()]),
        ))
        sections.append(table_formatter.markdown_block(
            "Published Table 4 checks",
            table_formatter.records_frame([
                {k: v for k, v in check.items() if k != "counts"} for check in self.published
            ]),
        ))
        return "\n".join(header) + "\n".join(sections)


class ReportService:
    """Runs every simulation concurrently, then adjudicates the results in a fixed order."""

    async def build_report(
        self,
        seed: Optional[int] = None,
        n: Optional[int] = None,
        n_trials: Optional[int] = None,
        p_minus: Optional[float] = None,
        chunk_size: Optional[int] = None,
        threads: Optional[int] = None,
    ) -> ConsolidatedReport:
        start = time.time()
        seed = rng_service.resolve_seed(seed)
        n = n or SIMULATION_CONFIG["mc_vectors"]
        n_trials = n_trials or 9 * n
        p_minus = SIMULATION_CONFIG["p_minus"] if p_minus is None else p_minus
        chunk_size = chunk_size or SIMULATION_CONFIG["chunk_size"]
        threads = threads or SIMULATION_CONFIG["threads"]
        scenario = local_realism_service.build_superdet_scenario()

        logger.info(f"[LOG] Running device and Monte Carlo simulations (Parallel), seed {seed}...")
        quantum, superdet, tallies = await asyncio.gather(
            asyncio.to_thread(
                quantum_model_service.run_quantum_experiment, n_trials, "uniform",
                rng_service.derive_seed(seed, QUANTUM_SEED_TAG), chunk_size, threads,
            ),
            asyncio.to_thread(
                local_realism_service.simulate_superdet, scenario, n_trials,
                rng_service.derive_seed(seed, SUPERDET_SEED_TAG), chunk_size, threads,
            ),
            asyncio.to_thread(
                lad_monte_carlo_service.run_all_relations, n, p_minus, seed, chunk_size, threads,
            ),
        )
        logger.info("[OK] Simulations complete")

        logger.info("[LOG] Recovering distributions and checking identities...")
        distributions, ratios, decompositions, case_b = {}, {}, {}, {}
        hull: Dict[str, HullVerdict] = {
            "quantum": analysis_service.hull_membership(HullQuery(self.quantum_same_fractions())),
            "bell_bound": analysis_service.hull_membership(HullQuery.uniform_case_b(Fraction(1, 3))),
            "lad_expected": analysis_service.hull_membership(
                HullQuery.uniform_case_b(lad_monte_carlo_service.expected_case_b_fraction(p_minus))
            ),
        }
        for t in tallies:
            d = analysis_service.recover_distribution(t)
            distributions[t.relation] = d
            ratios[t.relation] = analysis_service.same_different_ratio(d)
            decompositions[t.relation] = analysis_service.decompose_case_b_fraction(d)
            case_b[t.relation] = lad_monte_carlo_service.case_b_same_fraction(t)
            hull[f"relation_{t.relation}"] = analysis_service.hull_membership(HullQuery.from_tally(t))

        report = ConsolidatedReport(
            seed=seed,
            n_vectors=n,
            n_trials=n_trials,
            p_minus=p_minus,
            quantum=quantum,
            quantum_exact_same=self.quantum_same_fractions(),
            bell=local_realism_service.bell_enumeration(),
            table_2=local_realism_service.mixture_per_pair_fractions(table_2_distribution()),
            superdet_scenario=scenario,
            superdet=superdet,
            superdet_independence_gap=local_realism_service.statistical_independence_gap(superdet),
            realm=realm_matrix_service.matrix,
            relations=realm_matrix_service.relations,
            excluded_row_pairs=realm_matrix_service.excluded_row_pairs(),
            tallies=tallies,
            distributions=distributions,
            ratios=ratios,
            decompositions=decompositions,
            case_b_fractions=case_b,
            hull=hull,
            published=analysis_service.published_checks(),
            elapsed_seconds=time.time() - start,
        )
        logger.info(f"[OK] Report completed in {report.elapsed_seconds:.2f}s")
        return report

    @staticmethod
    def quantum_same_fractions() -> Tuple[Fraction, ...]:
        """Exact quantum same-color probability at each of the nine pairs."""
        same = []
        for pair in ALL_PAIRS:
            probs = quantum_model_service.exact_probabilities(pair.theta)
            same.append(Fraction(probs[JointOutcome.RR]) + Fraction(probs[JointOutcome.GG]))
        return tuple(same)

    def full_report(self, seed: Optional[int] = None, n: Optional[int] = None, **kwargs) -> ConsolidatedReport:
        return asyncio.run(self.build_report(seed, n, **kwargs))


# Create a singleton instance
report_service = ReportService()


def full_report(seed: Optional[int] = None, n: Optional[int] = None, **kwargs) -> ConsolidatedReport:
    return report_service.full_report(seed, n, **kwargs)
