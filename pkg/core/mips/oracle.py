"""
ANN oracle interface and the brute-force backend.

An oracle answers (c', r')-ANN queries over lifted unit vectors: it returns
the row of some point within c' r' of the query, or None. Every candidate
is verified by exact distance, so a non-None answer is always correct and
the only failure mode is a false None.
"""
from __future__ import annotations
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .point_set import PointSet
from .reduction import AnnSpec

DISTANCE_SLACK = 1e-12


class OracleBackend(str, Enum):
    LSH = "lsh"
    BRUTE = "brute"


@dataclass(frozen=True, slots=True)
class OracleAnswer:
    """Row of the returned point and the number of candidates examined."""
    row: Optional[int]
    probes: int


class AnnOracle(ABC):
    """One oracle O(c, r, 0, q_bar, delta') over a fixed lifted point matrix."""

    deterministic: bool = False

    def __init__(self, lifted: np.ndarray, ann: AnnSpec):
        self.lifted = lifted
        self.ann = ann
        self._radius_sq = ann.radius**2 + DISTANCE_SLACK

    @property
    def size(self) -> int:
        return int(self.lifted.shape[0])

    @abstractmethod
    def query(self, q_lifted: np.ndarray) -> OracleAnswer:
        """Return a verified candidate row (or None) for a unit query."""

    def _closest_verified(self, rows: np.ndarray, q_lifted: np.ndarray) -> Optional[int]:
        """Nearest of the candidate rows if within c' r'; ties go to the smallest row."""
        if rows.size == 0:
            return None
        diff = self.lifted[rows] - q_lifted
        dist_sq = np.einsum("ij,ij->i", diff, diff)
        best = int(np.argmin(dist_sq))
        if dist_sq[best] <= self._radius_sq:
            return int(rows[best])
        return None


class BruteForceOracle(AnnOracle):
    """Exact linear scan; deterministic, so one instance stands in for every copy."""

    deterministic = True

    def __init__(self, lifted: np.ndarray, ann: AnnSpec):
        super().__init__(lifted, ann)
        self._all_rows = np.arange(self.size)

    def query(self, q_lifted: np.ndarray) -> OracleAnswer:
        return OracleAnswer(row=self._closest_verified(self._all_rows, q_lifted), probes=self.size)


def brute_force_mips(ps: PointSet, q) -> tuple[int, float]:
    """Exact argmax of <q, p> over the set; ties go to the smallest id."""
    if ps.size == 0:
        raise ValueError("brute_force_mips needs a non-empty PointSet")
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    if q.shape != (ps.dim,):
        raise ValueError(f"query has shape {q.shape}, expected ({ps.dim},)")
    values = ps.points @ q
    # rows are sorted by id, so argmax's first-index rule is the smallest-id rule
    row = int(np.argmax(values))
    return int(ps.ids[row]), float(values[row])
