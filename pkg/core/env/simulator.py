"""
Synthetic stochastic linear bandit environments.

Rewards are <theta*, x_a> + N(0, sigma^2) with sigma <= 1, so the noise is
1-sub-Gaussian. The arm set never changes during a run. Instances are
written as an arms CSV (the PointSet format) plus an instance.json header.
"""
from __future__ import annotations
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional
import logging

import numpy as np
from pydantic import BaseModel, Field

from ..mips.point_set import PointSet

logger = logging.getLogger(__name__)

ARMS_FILE = "arms.csv"
HEADER_FILE = "instance.json"


class InstanceKind(str, Enum):
    SPHERE_UNIFORM = "sphere-uniform"
    CLUSTERED = "clustered"
    PLANTED_GAP = "planted-gap"


class InstanceHeader(BaseModel):
    """instance.json contents."""
    kind: InstanceKind
    num_arms: int = Field(ge=1)
    dim: int = Field(ge=1)
    theta_star: list[float]
    noise_std: float = Field(ge=0.0, le=1.0)
    seed: int
    gap: Optional[float] = None
    clusters: Optional[int] = None


@dataclass
class Environment:
    theta_star: np.ndarray
    arms: PointSet
    noise_std: float
    seed: int
    kind: InstanceKind = InstanceKind.SPHERE_UNIFORM
    rng: np.random.Generator = field(default=None, repr=False)
    gap: Optional[float] = None
    clusters: Optional[int] = None

    def __post_init__(self):
        self.theta_star = np.asarray(self.theta_star, dtype=np.float64).reshape(-1)
        if self.theta_star.shape != (self.arms.dim,):
            raise ValueError(f"theta* has shape {self.theta_star.shape}, arms have dim {self.arms.dim}")
        if np.linalg.norm(self.theta_star) > 1.0 + 1e-12:
            raise ValueError("|theta*| must be at most 1")
        if not 0.0 <= self.noise_std <= 1.0:
            raise ValueError(f"noise_std must be in [0, 1], got {self.noise_std}")
        if self.rng is None:
            self.rng = np.random.default_rng(np.random.SeedSequence(self.seed).spawn(1)[0])
        self.means = self.arms.points @ self.theta_star
        self.optimal_value = float(self.means.max())
        self.optimal_arm = int(self.arms.ids[int(np.argmax(self.means))])

    def expected_reward(self, arm: int) -> float:
        return float(self.means[self.arms.row(arm)])

    def regret(self, arm: int) -> float:
        return self.optimal_value - self.expected_reward(arm)

    def pull(self, arm: int) -> float:
        """<theta*, x_arm> plus Gaussian noise; one draw from the noise stream per pull."""
        mean = self.expected_reward(arm)
        noise = self.rng.normal(0.0, self.noise_std) if self.noise_std > 0 else 0.0
        return mean + noise

    def reseed_noise(self, seed: int | np.random.SeedSequence) -> None:
        self.rng = np.random.default_rng(seed)

    def header(self) -> InstanceHeader:
        return InstanceHeader(
            kind=self.kind,
            num_arms=self.arms.size,
            dim=self.arms.dim,
            theta_star=[float(v) for v in self.theta_star],
            noise_std=self.noise_std,
            seed=self.seed,
            gap=self.gap,
            clusters=self.clusters,
        )


def pull(env: Environment, arm: int) -> float:
    return env.pull(arm)


def _unit_rows(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    g = rng.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return g / norms


def _planted(rng: np.random.Generator, K: int, d: int, theta: np.ndarray, gap: float) -> np.ndarray:
    """One arm equal to theta*, the rest with <theta*, x> <= 1 - gap, all unit-norm."""
    if d == 1:
        arms = np.tile(-theta, (K, 1))
    else:
        a = rng.uniform(-1.0, 1.0 - gap, size=K)
        u = rng.standard_normal((K, d))
        u -= np.outer(u @ theta, theta)
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        arms = a[:, None] * theta + np.sqrt(1.0 - a**2)[:, None] * u
    arms[int(rng.integers(K))] = theta
    return arms


def _clustered(rng: np.random.Generator, K: int, d: int, clusters: int, spread: float = 0.1) -> np.ndarray:
    centers = _unit_rows(rng, clusters, d)
    labels = rng.integers(clusters, size=K)
    pts = centers[labels] + spread * rng.standard_normal((K, d))
    norms = np.linalg.norm(pts, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return pts / norms


def make_instance(
    kind: InstanceKind | str,
    K: int,
    d: int,
    seed: int,
    noise_std: float = 0.5,
    gap: float = 0.3,
    clusters: int = 8,
    noise_seed: int | np.random.SeedSequence | None = None,
) -> Environment:
    """Build an environment; the arm set and theta* depend on seed only."""
    kind = InstanceKind(kind)
    if K < 2:
        raise ValueError(f"need at least 2 arms, got K={K}")
    if d < 1:
        raise ValueError(f"dimension must be positive, got d={d}")

    rng = np.random.default_rng(seed)
    theta = _unit_rows(rng, 1, d)[0]
    if kind is InstanceKind.SPHERE_UNIFORM:
        points = _unit_rows(rng, K, d)
    elif kind is InstanceKind.CLUSTERED:
        if clusters < 1:
            raise ValueError(f"clusters must be positive, got {clusters}")
        points = _clustered(rng, K, d, clusters)
    else:
        if not 0.0 < gap <= 2.0:
            raise ValueError(f"gap must be in (0, 2], got {gap}")
        points = _planted(rng, K, d, theta, gap)

    env = Environment(
        theta_star=theta,
        arms=PointSet(points),
        noise_std=noise_std,
        seed=seed,
        kind=kind,
        rng=np.random.default_rng(noise_seed) if noise_seed is not None else None,
        gap=gap if kind is InstanceKind.PLANTED_GAP else None,
        clusters=clusters if kind is InstanceKind.CLUSTERED else None,
    )
    logger.debug("instance kind=%s K=%d d=%d seed=%d optimal=%.4f", kind.value, K, d, seed, env.optimal_value)
    return env


def save_instance(env: Environment, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    env.arms.to_csv(directory / ARMS_FILE)
    (directory / HEADER_FILE).write_text(env.header().model_dump_json(indent=2))
    return directory


def load_instance(directory: str | Path, noise_seed: int | np.random.SeedSequence | None = None) -> Environment:
    directory = Path(directory)
    header = InstanceHeader.model_validate_json((directory / HEADER_FILE).read_text())
    arms = PointSet.from_csv(directory / ARMS_FILE)
    if arms.size != header.num_arms or arms.dim != header.dim:
        raise ValueError(
            f"{ARMS_FILE} holds {arms.size}x{arms.dim} points, header says {header.num_arms}x{header.dim}"
        )
    return Environment(
        theta_star=np.asarray(header.theta_star),
        arms=arms,
        noise_std=header.noise_std,
        seed=header.seed,
        kind=header.kind,
        rng=np.random.default_rng(noise_seed) if noise_seed is not None else None,
        gap=header.gap,
        clusters=header.clusters,
    )


# ---------------------------------------------------------------------------
# Regret trace
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class StepRecord:
    t: int
    arm: int
    reward: float
    regret: float
    cum_regret: float
    probes: int
    stage_or_level: int
    select_micros: float
    fallback: bool
    approx_loss: Optional[float] = None


@dataclass
class RegretTrace:
    """Per-step records of one run."""
    records: list[StepRecord] = field(default_factory=list)

    def append(
        self,
        arm: int,
        reward: float,
        regret: float,
        probes: int,
        stage_or_level: int = 0,
        select_micros: float = 0.0,
        fallback: bool = False,
        approx_loss: Optional[float] = None,
    ) -> StepRecord:
        record = StepRecord(
            t=len(self.records) + 1,
            arm=arm,
            reward=reward,
            regret=regret,
            cum_regret=self.cumulative_regret + regret,
            probes=probes,
            stage_or_level=stage_or_level,
            select_micros=select_micros,
            fallback=fallback,
            approx_loss=approx_loss,
        )
        self.records.append(record)
        return record

    def __len__(self) -> int:
        return len(self.records)

    @property
    def cumulative_regret(self) -> float:
        return self.records[-1].cum_regret if self.records else 0.0

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])
