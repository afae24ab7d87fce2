"""
Hyperplane LSH backend for (c', r')-ANN over lifted unit vectors.

Each of L tables concatenates k sign-of-random-projection bits. Sizing:
  k = ceil(log2 K)
  P1 = 1 - theta(r') / pi,  theta(r') = 2 arcsin(r' / 2)
  L  = smallest integer with (1 - P1^k)^L <= delta'
Per-table seeds are spawned from the master seed, so a rebuild with the
same seed reproduces identical tables.
"""
from __future__ import annotations
from dataclasses import dataclass
from typing import Optional
import logging
import math

import numpy as np
from pydantic import BaseModel, Field

from ..config import LshSettings
from .oracle import AnnOracle, OracleAnswer
from .reduction import AnnSpec

logger = logging.getLogger(__name__)

UNIT_TOLERANCE = 1e-8


class LshStats(BaseModel):
    """Structured index report."""
    num_points: int
    hashes_per_table: int
    tables: int
    tables_capped: bool = False
    collision_prob: float = Field(description="P1 at lifted distance r'")
    occupancy_histogram: dict[int, int] = Field(default_factory=dict, description="bucket size -> count")
    queries: int = 0
    mean_probes: float = 0.0


@dataclass(frozen=True)
class LshTable:
    planes: np.ndarray  # (k, D)
    buckets: dict[int, np.ndarray]


def collision_probability(distance: float) -> float:
    """Probability that one random hyperplane does not separate two unit vectors."""
    theta = 2.0 * math.asin(min(1.0, distance / 2.0))
    return 1.0 - theta / math.pi


def table_parameters(
    num_points: int,
    ann: AnnSpec,
    fail: float,
    settings: LshSettings,
) -> tuple[int, int, bool]:
    """(k, L, capped) for K points, an ANN spec and target failure probability."""
    k = max(1, math.ceil(math.log2(num_points))) if num_points > 1 else 1
    k = min(k, settings.max_hashes)
    p_k = collision_probability(ann.r_prime) ** k
    if p_k >= 1.0:
        tables = 1
    elif p_k <= 0.0:
        tables = math.inf
    else:
        tables = max(1, math.ceil(math.log(fail) / math.log1p(-p_k)))

    capped = settings.max_tables is not None and tables > settings.max_tables
    if capped:
        logger.warning(
            "lsh tables capped wanted=%s cap=%d k=%d r_prime=%.4f",
            tables, settings.max_tables, k, ann.r_prime,
        )
        tables = settings.max_tables
    if tables == math.inf:
        raise ValueError("collision probability is zero; set LshSettings.max_tables")
    return k, int(tables), capped


def _hash_codes(vectors: np.ndarray, planes: np.ndarray) -> np.ndarray:
    bits = (vectors @ planes.T) >= 0.0
    weights = np.left_shift(np.int64(1), np.arange(planes.shape[0], dtype=np.int64))
    return bits.astype(np.int64) @ weights


class LshIndex(AnnOracle):
    """L hash tables of k hyperplane bits with exact post-verification."""

    def __init__(
        self,
        lifted: np.ndarray,
        ann: AnnSpec,
        fail: float,
        seed: int | np.random.SeedSequence,
        settings: Optional[LshSettings] = None,
    ):
        super().__init__(lifted, ann)
        settings = settings or LshSettings()
        self.target_fail = fail
        self.seed = seed
        self.hashes_per_table, num_tables, self._capped = table_parameters(
            self.size, ann, fail, settings
        )

        root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        tables = []
        for child in root.spawn(num_tables):
            rng = np.random.default_rng(child)
            planes = rng.standard_normal((self.hashes_per_table, lifted.shape[1]))
            codes = _hash_codes(lifted, planes)
            order = np.argsort(codes, kind="stable")
            uniq, starts = np.unique(codes[order], return_index=True)
            ends = np.append(starts[1:], order.size)
            buckets = {int(c): order[s:e] for c, s, e in zip(uniq, starts, ends)}
            tables.append(LshTable(planes=planes, buckets=buckets))
        self.tables: tuple[LshTable, ...] = tuple(tables)

        self._queries = 0
        self._probes = 0

    def query(self, q_lifted: np.ndarray) -> OracleAnswer:
        self._queries += 1
        hits = []
        for table in self.tables:
            code = int(_hash_codes(q_lifted[None, :], table.planes)[0])
            bucket = table.buckets.get(code)
            if bucket is not None:
                hits.append(bucket)
        if not hits:
            return OracleAnswer(row=None, probes=0)

        candidates = np.unique(np.concatenate(hits))
        self._probes += candidates.size
        return OracleAnswer(row=self._closest_verified(candidates, q_lifted), probes=int(candidates.size))

    def stats(self) -> LshStats:
        sizes = [b.size for t in self.tables for b in t.buckets.values()]
        hist = np.bincount(sizes) if sizes else np.zeros(0, dtype=int)
        return LshStats(
            num_points=self.size,
            hashes_per_table=self.hashes_per_table,
            tables=len(self.tables),
            tables_capped=self._capped,
            collision_prob=collision_probability(self.ann.r_prime),
            occupancy_histogram={int(s): int(n) for s, n in enumerate(hist) if n},
            queries=self._queries,
            mean_probes=self._probes / self._queries if self._queries else 0.0,
        )


def build_lsh(
    lifted: np.ndarray,
    ann: AnnSpec,
    fail: float,
    seed: int | np.random.SeedSequence,
    settings: Optional[LshSettings] = None,
) -> LshIndex:
    """Build one LSH oracle over lifted unit vectors."""
    if ann.c_prime <= 1.0:
        raise ValueError(f"c'={ann.c_prime} <= 1: no sublinear regime exists")
    if not 0.0 < fail < 1.0:
        raise ValueError(f"failure probability must be in (0, 1), got {fail}")
    norms = np.linalg.norm(lifted, axis=1)
    if np.any(np.abs(norms - 1.0) > UNIT_TOLERANCE):
        raise ValueError("lifted points must be unit-norm")
    return LshIndex(lifted, ann, fail, seed, settings)
