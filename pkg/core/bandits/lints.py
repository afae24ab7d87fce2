"""
Accelerated linear Thompson sampling over a ladder of MIPS levels.

Level m certifies x^T theta_tilde >= c_m r_m - eta with c_m = 1 - 1/(m+1)
and r_m = (1 + beta + gamma) m eta, so the arm from the largest firing
level is within (3 + beta + gamma) eta of the best. Levels are found by
binary search; with exact oracles firing is monotone in m.
"""
from __future__ import annotations
from dataclasses import dataclass, field
from typing import Callable, Optional, TypeVar
import logging
import math

import numpy as np

from ..config import BanditMipsConfig
from ..linalg.ridge import RidgeState
from ..mips.adaptive import AdaptiveMipsIndex, IndexStats, MipsAnswer, build_adaptive
from ..mips.oracle import OracleBackend
from ..mips.point_set import PointSet
from ..mips.reduction import MipsSpec, lift_points
from .base import Selection, exact_argmax
from .confidence import beta as confidence_beta
from .confidence import gamma as confidence_gamma
from .confidence import num_levels
from .sampler import TsSampler

logger = logging.getLogger(__name__)

A = TypeVar("A")


class LevelLadder:
    """Lazily built adaptive indexes, one per level m = 1..M, over a shared lifted arm matrix."""

    def __init__(
        self,
        arms: PointSet,
        eta: float,
        q_bar: float,
        delta_prime: float,
        oracle_fail: float,
        seed: np.random.SeedSequence,
        backend: OracleBackend = OracleBackend.LSH,
        config: Optional[BanditMipsConfig] = None,
    ):
        self.arms = arms
        self.eta = eta
        self.q_bar = q_bar
        self.delta_prime = delta_prime
        self.oracle_fail = oracle_fail
        self.seed = seed
        self.backend = OracleBackend(backend)
        self.config = config or BanditMipsConfig.default()
        self.size = num_levels(eta)
        self.lifted = lift_points(arms.points)
        self._levels: dict[int, AdaptiveMipsIndex] = {}

    def spec(self, level: int) -> MipsSpec:
        return MipsSpec(
            c=1.0 - 1.0 / (level + 1),
            r=self.q_bar * level * self.eta,
            eps=self.eta,
            q_bar=self.q_bar,
            delta=self.delta_prime,
        )

    def certifiable(self, level: int) -> bool:
        """Levels with r_m >= q_bar can never fire."""
        return self.q_bar * level * self.eta < self.q_bar

    def level(self, level: int) -> AdaptiveMipsIndex:
        if not 1 <= level <= self.size:
            raise ValueError(f"level {level} outside 1..{self.size}")
        index = self._levels.get(level)
        if index is None:
            # spawn_key per level keeps seeds independent of build order
            child = np.random.SeedSequence(self.seed.entropy, spawn_key=(*self.seed.spawn_key, level))
            index = build_adaptive(
                self.arms, self.spec(level), self.oracle_fail, child,
                self.backend, self.config, lifted=self.lifted,
            )
            self._levels[level] = index
        return index

    def prebuild(self) -> int:
        """Build every certifiable level now; returns the number built."""
        for m in range(1, self.size + 1):
            if self.certifiable(m):
                self.level(m)
        return len(self._levels)

    @property
    def built(self) -> int:
        return len(self._levels)

    def stats(self) -> list[IndexStats]:
        return [self._levels[m].stats() for m in sorted(self._levels)]


def largest_firing_level(
    query: Callable[[int], Optional[A]],
    top: int,
    repair_budget: int = 0,
) -> tuple[int, Optional[A]]:
    """Largest m in 1..top with a non-null query(m), by binary search.

    Exact under monotone firing. When the search finds nothing, up to
    repair_budget levels below the first midpoint are re-scanned downward.
    Returns (0, None) if nothing fires.
    """
    lo, hi = 0, top + 1
    best: Optional[A] = None
    first_mid: Optional[int] = None
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if first_mid is None:
            first_mid = mid
        answer = query(mid)
        if answer is not None:
            lo, best = mid, answer
        else:
            hi = mid
    if best is not None or first_mid is None:
        return lo, best

    m = first_mid
    for _ in range(repair_budget):
        m -= 1
        if m < 1:
            break
        answer = query(m)
        if answer is not None:
            return m, answer
    return 0, None


@dataclass
class LinTsState:
    ridge: RidgeState
    arms: PointSet
    horizon: int
    eta: float
    beta: float
    gamma: float
    delta_prime: float
    ladder: LevelLadder
    sampler: TsSampler
    theta_tilde: Optional[np.ndarray] = None
    fallbacks: int = 0
    norm_violations: int = 0
    last_level: int = field(default=0)

    @property
    def q_bar(self) -> float:
        return 1.0 + self.beta + self.gamma


def lints_init(
    arms: PointSet,
    horizon: int,
    delta: float,
    eta: float,
    seed: int | np.random.SeedSequence,
    backend: OracleBackend = OracleBackend.LSH,
    config: Optional[BanditMipsConfig] = None,
) -> LinTsState:
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must be in (0, 1), got {eta}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    if horizon < 1:
        raise ValueError(f"horizon must be at least 1, got {horizon}")
    config = config or BanditMipsConfig.default()

    d = arms.dim
    delta_prime = delta / (4.0 * horizon)
    b = confidence_beta(delta_prime, d, horizon)
    g = confidence_gamma(b, d, delta_prime, config.ts.b, config.ts.b_prime)
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    sampler_seed, index_seed = root.spawn(2)

    ladder = LevelLadder(
        arms, eta, 1.0 + b + g, delta_prime, config.adaptive.oracle_fail,
        index_seed, backend, config,
    )
    logger.info(
        "lints init arms=%d dim=%d beta=%.4f gamma=%.4f eta=%.4g levels=%d",
        arms.size, d, b, g, eta, ladder.size,
    )
    return LinTsState(
        ridge=RidgeState.fresh(d, refactor_every=config.ridge.refactor_every),
        arms=arms,
        horizon=horizon,
        eta=eta,
        beta=b,
        gamma=g,
        delta_prime=delta_prime,
        ladder=ladder,
        sampler=TsSampler(d, sampler_seed, config.ts),
    )


def perturbed_estimate(ridge: RidgeState, beta: float, xi: np.ndarray) -> np.ndarray:
    """theta_hat + beta V^{-1/2} xi."""
    return ridge.theta_hat + beta * (ridge.inv_sqrt() @ xi)


def lints_baseline_select(ridge: RidgeState, arms: PointSet, theta_tilde: np.ndarray) -> int:
    """Exact argmax of <x_a, theta_tilde>; ties go to the smallest id."""
    return exact_argmax(arms, arms.points @ np.asarray(theta_tilde, dtype=np.float64))


def lints_select(state: LinTsState) -> Selection:
    """Sample theta_tilde and return the arm of the largest firing level."""
    xi = state.sampler.sample()
    theta_tilde = perturbed_estimate(state.ridge, state.beta, xi)
    state.theta_tilde = theta_tilde
    ladder = state.ladder

    norm = float(np.linalg.norm(theta_tilde))
    if norm > state.q_bar:
        state.norm_violations += 1
        state.fallbacks += 1
        logger.warning(
            "lints norm guard norm=%.6g q_bar=%.6g step=%d", norm, state.q_bar, state.ridge.step
        )
        arm = lints_baseline_select(state.ridge, state.arms, theta_tilde)
        return Selection(arm=arm, probes=state.arms.size, fallback=True, norm_violation=True)

    probes = 0

    def fire(m: int) -> Optional[MipsAnswer]:
        nonlocal probes
        if not ladder.certifiable(m):
            return None
        outcome = ladder.level(m).search(theta_tilde)
        probes += outcome.probes
        return outcome.answer

    repair = 0 if ladder.backend is OracleBackend.BRUTE else math.ceil(math.log2(ladder.size)) + 1
    level, answer = largest_firing_level(fire, ladder.size, repair)
    state.last_level = level
    if answer is not None:
        return Selection(arm=answer.id, probes=probes, tier=level, value=answer.value)

    state.fallbacks += 1
    logger.info("lints fallback to exact scan step=%d norm=%.6g", state.ridge.step, norm)
    arm = lints_baseline_select(state.ridge, state.arms, theta_tilde)
    return Selection(arm=arm, probes=probes + state.arms.size, fallback=True)


class LinTsPolicy:
    """Accelerated linear Thompson sampling."""

    name = "lints"

    def __init__(
        self,
        arms: PointSet,
        horizon: int,
        delta: float,
        eta: float,
        seed: int | np.random.SeedSequence,
        backend: OracleBackend = OracleBackend.LSH,
        config: Optional[BanditMipsConfig] = None,
    ):
        self.state = lints_init(arms, horizon, delta, eta, seed, backend, config)

    @property
    def arms(self) -> PointSet:
        return self.state.arms

    @property
    def ridge(self) -> RidgeState:
        return self.state.ridge

    @property
    def theta_tilde(self) -> Optional[np.ndarray]:
        return self.state.theta_tilde

    def select(self) -> Selection:
        return lints_select(self.state)

    def update(self, arm: int, reward: float) -> None:
        self.state.ridge.update(self.arms.vector(arm), reward)

    def index_stats(self) -> list[IndexStats]:
        return self.state.ladder.stats()


class LinTsExactPolicy:
    """Linear-scan Thompson sampling; consumes the sampler stream exactly like LinTsPolicy."""

    name = "lints-exact"

    def __init__(
        self,
        arms: PointSet,
        horizon: int,
        delta: float,
        seed: int | np.random.SeedSequence,
        config: Optional[BanditMipsConfig] = None,
    ):
        config = config or BanditMipsConfig.default()
        self.arms = arms
        self.ridge = RidgeState.fresh(arms.dim, refactor_every=config.ridge.refactor_every)
        delta_prime = delta / (4.0 * horizon)
        self.beta = confidence_beta(delta_prime, arms.dim, horizon)
        self.gamma = confidence_gamma(self.beta, arms.dim, delta_prime, config.ts.b, config.ts.b_prime)
        root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        sampler_seed, _ = root.spawn(2)
        self.sampler = TsSampler(arms.dim, sampler_seed, config.ts)
        self.theta_tilde: Optional[np.ndarray] = None

    def select(self) -> Selection:
        self.theta_tilde = perturbed_estimate(self.ridge, self.beta, self.sampler.sample())
        arm = lints_baseline_select(self.ridge, self.arms, self.theta_tilde)
        return Selection(arm=arm, probes=self.arms.size)

    def update(self, arm: int, reward: float) -> None:
        self.ridge.update(self.arms.vector(arm), reward)

    def index_stats(self) -> list[IndexStats]:
        return []
