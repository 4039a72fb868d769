"""
Seeded Monte Carlo sampling of unit directions inside a linear subspace.

Every estimate is split into `workers` streams. Stream i draws from a child
of SeedSequence(seed, spawn_key=key), where key identifies the face being
measured, so results depend only on (seed, key, samples, workers).
"""

import functools
import logging
import multiprocessing as mp
from dataclasses import dataclass
from typing import Iterator, List, Sequence

import numpy as np

from .config import CONE_TOLERANCE, MC_CHUNK_SIZE, MC_SAMPLES, MC_WORKERS

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MonteCarloConfig:
    samples: int = MC_SAMPLES
    seed: int = 0
    workers: int = MC_WORKERS
    force_monte_carlo: bool = False
    tolerance: float = CONE_TOLERANCE

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError(f"samples must be positive, got {self.samples}")
        if self.workers < 1:
            raise ValueError(f"workers must be positive, got {self.workers}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")

    def stream_seeds(self, key: Sequence[int]) -> List[np.random.SeedSequence]:
        root = np.random.SeedSequence(
            entropy=self.seed, spawn_key=tuple(int(k) for k in key)
        )
        return root.spawn(self.workers)

    def stream_sizes(self) -> List[int]:
        base, extra = divmod(self.samples, self.workers)
        return [base + (1 if i < extra else 0) for i in range(self.workers)]


def proportion_stderr(p: float, count: int) -> float:
    return float(np.sqrt(max(p * (1.0 - p), 0.0) / count))


def sample_directions(
    rng: np.random.Generator, basis_rows: np.ndarray, count: int
) -> np.ndarray:
    """Uniform unit vectors of span(basis_rows); basis_rows is orthonormal (d, n)."""
    d, n = basis_rows.shape
    if d == 0:
        return np.zeros((count, n))
    gauss = rng.standard_normal((count, d))
    gauss /= np.linalg.norm(gauss, axis=1, keepdims=True)
    return gauss @ basis_rows


def _count_hits_worker(
    offsets: np.ndarray,
    basis_rows: np.ndarray,
    count: int,
    seed_seq: np.random.SeedSequence,
    tol: float,
    chunk: int,
) -> int:
    rng = np.random.default_rng(seed_seq)
    hits = 0
    remaining = count
    while remaining > 0:
        batch = min(chunk, remaining)
        u = sample_directions(rng, basis_rows, batch)
        hits += int(np.count_nonzero(np.all(u @ offsets.T <= tol, axis=1)))
        remaining -= batch
    return hits


def count_cone_hits(
    offsets: np.ndarray,
    basis_rows: np.ndarray,
    mc: MonteCarloConfig,
    key: Sequence[int],
) -> int:
    """Number of sampled directions u with <u, offset> <= tol for every offset."""
    worker = functools.partial(
        _count_hits_worker,
        np.ascontiguousarray(offsets, dtype=float),
        np.ascontiguousarray(basis_rows, dtype=float),
        tol=mc.tolerance,
        chunk=MC_CHUNK_SIZE,
    )
    args = list(zip(mc.stream_sizes(), mc.stream_seeds(key)))

    if mc.workers > 1:
        with mp.Pool(mc.workers) as p:
            counts = p.starmap(worker, args)
    else:
        counts = [worker(size, seed) for size, seed in args]

    logger.debug(f"cone hits for key {tuple(key)}: {counts}")
    return int(sum(counts))


def iter_direction_batches(
    basis_rows: np.ndarray, mc: MonteCarloConfig, key: Sequence[int]
) -> Iterator[np.ndarray]:
    """Same streams as count_cone_hits, yielded in-process batch by batch."""
    for size, seed in zip(mc.stream_sizes(), mc.stream_seeds(key)):
        rng = np.random.default_rng(seed)
        remaining = size
        while remaining > 0:
            batch = min(MC_CHUNK_SIZE, remaining)
            yield sample_directions(rng, basis_rows, batch)
            remaining -= batch
