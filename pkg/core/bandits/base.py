"""
Shared policy surface for the bandit loop.

Every policy answers select() with a Selection and absorbs feedback through
update(arm, reward). The four policies differ only in how select() finds
the arm; the ridge estimator is shared code.
"""
from __future__ import annotations
from dataclasses import dataclass
from typing import Optional, Protocol, runtime_checkable

import numpy as np

from ..linalg.ridge import RidgeState
from ..mips.adaptive import IndexStats
from ..mips.point_set import PointSet


@dataclass(frozen=True, slots=True)
class Selection:
    """One select() result.

    tier is the OFUL stage or the LinTS level that produced the arm (0 for
    exact scans). value is the certified inner product when an index answered.
    """
    arm: int
    probes: int
    tier: int = 0
    value: Optional[float] = None
    fallback: bool = False
    randomized: bool = False
    norm_violation: bool = False


@runtime_checkable
class BanditPolicy(Protocol):
    name: str
    arms: PointSet
    ridge: RidgeState

    def select(self) -> Selection: ...

    def update(self, arm: int, reward: float) -> None: ...

    def index_stats(self) -> list[IndexStats]: ...


def exact_argmax(arms: PointSet, scores: np.ndarray) -> int:
    """Arm id with the largest score; ties go to the smallest id."""
    return int(arms.ids[int(np.argmax(scores))])
