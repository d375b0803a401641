# app/services/rng_service.py - Seeded, chunked random streams shared by every simulator
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence

import numpy as np

from app.config.mermin_config import SIMULATION_CONFIG
from app.core.errors import InvalidRunParameterError

logger = logging.getLogger(__name__)

GENERATOR_NAME = SIMULATION_CONFIG["generator"]

ChunkWorker = Callable[[np.random.Generator, int], np.ndarray]


class RNGService:
    """Derives reproducible numpy generators and runs chunked simulations.

    Chunk i of a run seeded with master seed m and key path k draws from
    PCG64(SeedSequence(m, spawn_key=k + (i,))). Results therefore depend on
    (seed, key path, chunk size) only, never on the number of threads.
    """

    def resolve_seed(self, seed: Optional[int]) -> int:
        if seed is not None:
            if seed < 0:
                raise InvalidRunParameterError(f"Seeds must be non-negative, got {seed}")
            return int(seed)
        if SIMULATION_CONFIG["seed"] is not None:
            return int(SIMULATION_CONFIG["seed"])
        fresh = int(np.random.SeedSequence().entropy)
        logger.warning(f"[WARN] No seed given, generated seed {fresh}")
        return fresh

    def derive_seed(self, seed: int, tag: int) -> int:
        """Independent 63-bit seed for a named sub-run of a master seed."""
        state = np.random.SeedSequence(seed, spawn_key=(int(tag),)).generate_state(1, np.uint64)[0]
        return int(state >> np.uint64(1))

    def generator(self, seed: int, key_path: Sequence[int] = ()) -> np.random.Generator:
        sequence = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key_path))
        return np.random.Generator(np.random.PCG64(sequence))

    @staticmethod
    def chunk_sizes(n: int, chunk_size: int) -> List[int]:
        if n < 1:
            raise InvalidRunParameterError(f"Need at least one draw, got {n}")
        if chunk_size < 1:
            raise InvalidRunParameterError(f"Chunk size must be positive, got {chunk_size}")
        full, rest = divmod(n, chunk_size)
        return [chunk_size] * full + ([rest] if rest else [])

    def run_chunked(
        self,
        n: int,
        seed: int,
        worker: ChunkWorker,
        chunk_size: Optional[int] = None,
        threads: Optional[int] = None,
        key_path: Sequence[int] = (),
    ) -> np.ndarray:
        """Run worker over every chunk and sum the integer arrays it returns."""
        chunk_size = chunk_size or SIMULATION_CONFIG["chunk_size"]
        threads = threads or SIMULATION_CONFIG["threads"]
        sizes = self.chunk_sizes(n, chunk_size)

        def _run(index: int) -> np.ndarray:
            rng = self.generator(seed, tuple(key_path) + (index,))
            return np.asarray(worker(rng, sizes[index]), dtype=np.int64)

        if threads > 1 and len(sizes) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(_run, range(len(sizes))))
        else:
            parts = [_run(i) for i in range(len(sizes))]

        total = parts[0].copy()
        for part in parts[1:]:
            total += part
        return total


# Create a singleton instance
rng_service = RNGService()
