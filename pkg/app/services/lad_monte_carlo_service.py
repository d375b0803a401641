# app/services/lad_monte_carlo_service.py - G9 vectors drawn through a functional relation's domain
import logging
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Dict, List, Optional, Union

import numpy as np

from app.config.mermin_config import SIMULATION_CONFIG
from app.core.core_types import CASE_B_PAIRS
from app.schemas.reports import McConfig, TallyTable
from app.services.realm_matrix_service import (
    G9_LABELS,
    MATCH,
    MISMATCH,
    FunctionalRelation,
    realm_matrix_service,
)
from app.services.rng_service import GENERATOR_NAME, rng_service

logger = logging.getLogger(__name__)

# Domain value pair index: 2 * [first is +1] + [second is +1]
_DOMAIN_PAIRS = ((MATCH, MATCH), (MATCH, MISMATCH), (MISMATCH, MATCH), (MISMATCH, MISMATCH))


class LadMonteCarloService:
    """Reproduces the twelve functional-relation Monte Carlo runs and their -1 tallies."""

    def _column_for_domain(self, relation: FunctionalRelation) -> List[int]:
        """Realm matrix column position drawn for each domain value pair, in _DOMAIN_PAIRS order."""
        labels = [realm_matrix_service.apply_relation(relation, values).label for values in _DOMAIN_PAIRS]
        return [G9_LABELS.index(label) for label in labels]

    def expected_column_probabilities(self, relation: Union[str, FunctionalRelation],
                                      p_minus: Union[Fraction, float] = Fraction(1, 4)) -> Dict[str, Fraction]:
        """Exact draw probability of each G9 column when both domain coordinates are independent."""
        relation = self._resolve(relation)
        p = Fraction(p_minus)
        q = 1 - p
        weight = {MATCH: p, MISMATCH: q}
        probs = {label: Fraction(0) for label in G9_LABELS}
        for values in _DOMAIN_PAIRS:
            column = realm_matrix_service.apply_relation(relation, values)
            probs[column.label] += weight[values[0]] * weight[values[1]]
        return probs

    def expected_case_b_fraction(self, p_minus: Union[Fraction, float] = Fraction(1, 4)) -> Fraction:
        """P(G9-1) + (1 - P(G9-1))/3 with P(G9-1) = p^2; exactly 3/8 at p = 1/4."""
        p = Fraction(p_minus)
        g1 = p * p
        return g1 + (1 - g1) / 3

    def run_simulation(self, cfg: McConfig, key_path: Optional[List[int]] = None) -> TallyTable:
        """Draw n_vectors G9 vectors and count -1 results at each setting pair."""
        relation = self._resolve(cfg.relation)
        seed = rng_service.resolve_seed(cfg.seed)
        key_path = list(key_path or [])
        matrix = realm_matrix_service.matrix
        columns = np.array([col.entries for col in matrix.columns], dtype=np.int8)
        column_for_domain = np.array(self._column_for_domain(relation), dtype=np.int64)
        p_minus = cfg.p_minus

        def worker(rng: np.random.Generator, size: int) -> np.ndarray:
            first_plus = rng.random(size) >= p_minus
            second_plus = rng.random(size) >= p_minus
            col_idx = column_for_domain[2 * first_plus.astype(np.int64) + second_plus.astype(np.int64)]
            vectors = columns[col_idx]
            minus_counts = (vectors == MATCH).sum(axis=0)
            draws = np.bincount(col_idx, minlength=len(G9_LABELS))
            return np.concatenate([minus_counts, draws])

        logger.info(f"[LOG] Monte Carlo {relation.arrow}: {cfg.n_vectors} vectors, p_minus {p_minus}, seed {seed}")
        merged = rng_service.run_chunked(
            cfg.n_vectors, seed, worker, cfg.chunk_size, cfg.threads, key_path=key_path
        )
        tally = TallyTable(
            relation=relation.label,
            n_vectors=cfg.n_vectors,
            counts=[int(c) for c in merged[:9]],
            p_minus=p_minus,
            seed=seed,
            seed_path=key_path,
            generator=GENERATOR_NAME,
            chunk_size=cfg.chunk_size,
            column_draws={label: int(c) for label, c in zip(G9_LABELS, merged[9:])},
        )
        logger.info(f"[OK] Relation {relation.label} case (b) same fraction {float(self.case_b_same_fraction(tally)):.6f}")
        return tally

    def case_b_same_fraction(self, t: TallyTable) -> Fraction:
        same = sum(t.count(p.label) for p in CASE_B_PAIRS)
        return Fraction(same, len(CASE_B_PAIRS) * t.n_vectors)

    def run_all_relations(
        self,
        n: Optional[int] = None,
        p_minus: Optional[float] = None,
        seed: Optional[int] = None,
        chunk_size: Optional[int] = None,
        threads: Optional[int] = None,
    ) -> List[TallyTable]:
        """One run per relation in label order; relation r draws from sub-seed path (int(r),)."""
        n = n or SIMULATION_CONFIG["mc_vectors"]
        p_minus = SIMULATION_CONFIG["p_minus"] if p_minus is None else p_minus
        seed = rng_service.resolve_seed(seed)
        chunk_size = chunk_size or SIMULATION_CONFIG["chunk_size"]
        threads = threads or SIMULATION_CONFIG["threads"]
        relations = realm_matrix_service.relations

        def _one(relation: FunctionalRelation) -> TallyTable:
            cfg = McConfig(relation=relation.label, n_vectors=n, p_minus=p_minus, seed=seed,
                           chunk_size=chunk_size, threads=1)
            return self.run_simulation(cfg, key_path=[int(relation.label)])

        logger.info(f"[LOG] Running all {len(relations)} functional relations with seed {seed}...")
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                tallies = list(pool.map(_one, relations))
        else:
            tallies = [_one(r) for r in relations]
        logger.info(f"[OK] All {len(tallies)} Monte Carlo runs complete")
        return tallies

    @staticmethod
    def _resolve(relation: Union[str, FunctionalRelation]) -> FunctionalRelation:
        if isinstance(relation, FunctionalRelation):
            return relation
        return realm_matrix_service.get_relation(relation)


# Create a singleton instance
lad_monte_carlo_service = LadMonteCarloService()


def run_simulation(cfg: McConfig) -> TallyTable:
    return lad_monte_carlo_service.run_simulation(cfg)


def case_b_same_fraction(t: TallyTable) -> Fraction:
    return lad_monte_carlo_service.case_b_same_fraction(t)


def run_all_relations(n: Optional[int] = None, p_minus: Optional[float] = None,
                      seed: Optional[int] = None, **kwargs) -> List[TallyTable]:
    return lad_monte_carlo_service.run_all_relations(n, p_minus, seed, **kwargs)
