"""
Accelerated OFUL with staged arm elimination.

Arms are indexed through their vectorized outer products vec(x x^T), so the
MIPS value of the query vec(beta^2 4^s V^-1) is beta^2 4^s ||x||^2_{V^-1}.
At stage s the index either returns an arm whose uncertainty is at least
about 2^-(s+1), or nothing; nothing means every active arm is already known
to within 2^-s, so arms whose UCB falls below the best LCB are dropped and
the next stage begins over the survivors. The last stage has no query path
and plays a uniformly random surviving arm.
"""
from __future__ import annotations
from dataclasses import dataclass, field
from typing import Optional
import logging

import numpy as np

from ..config import BanditMipsConfig
from ..guardrails.invariants import InvariantResult, InvariantViolation, check_query_norm, enforce
from ..linalg.ridge import RidgeState
from ..mips.adaptive import AdaptiveMipsIndex, IndexStats, build_adaptive
from ..mips.oracle import OracleBackend
from ..mips.point_set import PointSet
from ..mips.reduction import MipsSpec
from ..observability import get_tracer, traced_span
from .base import Selection, exact_argmax
from .confidence import beta as confidence_beta
from .confidence import max_stage as stage_ceiling

logger = logging.getLogger(__name__)


def outer_products(points: np.ndarray) -> np.ndarray:
    """Row-wise vec(x x^T), shape (K, d*d); norms are |x|^2."""
    norms = np.linalg.norm(points, axis=1)
    scale = np.where(norms > 1.0, 1.0 / np.where(norms > 0, norms, 1.0), 1.0)
    x = points * scale[:, None]
    return np.einsum("ki,kj->kij", x, x).reshape(x.shape[0], -1)


@dataclass
class OfulState:
    ridge: RidgeState
    arms: PointSet
    horizon: int
    eta: float
    beta: float
    delta_prime: float
    max_stage: int
    spec: MipsSpec
    backend: OracleBackend
    oracle_fail: float
    config: BanditMipsConfig
    rng: np.random.Generator
    index_seeds: np.random.SeedSequence
    stage: int = 1
    active_arms: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    mips: Optional[AdaptiveMipsIndex] = None
    builds: int = 0
    retired: list[IndexStats] = field(default_factory=list)

    def active_rows(self) -> np.ndarray:
        return np.searchsorted(self.arms.ids, self.active_arms)


def _rebuild(state: OfulState) -> None:
    if state.mips is not None:
        state.retired.append(state.mips.stats())
        state.mips = None
    if state.stage >= state.max_stage:
        return
    survivors = state.arms.subset(state.active_arms).map(outer_products)
    (child,) = state.index_seeds.spawn(1)
    state.mips = build_adaptive(
        survivors, state.spec, state.oracle_fail, child, state.backend, state.config
    )
    state.builds += 1


def oful_init(
    arms: PointSet,
    horizon: int,
    delta: float,
    eta: float,
    seed: int | np.random.SeedSequence,
    backend: OracleBackend = OracleBackend.LSH,
    config: Optional[BanditMipsConfig] = None,
) -> OfulState:
    """Stage-1 state with an adaptive index over every arm's outer product."""
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must be in (0, 1), got {eta}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    if horizon < 1:
        raise ValueError(f"horizon must be at least 1, got {horizon}")
    config = config or BanditMipsConfig.default()

    d = arms.dim
    delta_prime = delta / 2.0
    b = confidence_beta(delta_prime, d, horizon)
    spec = MipsSpec(c=0.25, r=1.0 - eta**2, eps=eta**2, q_bar=d * b**2 / eta**2, delta=delta_prime)

    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    rng_seed, index_seeds = root.spawn(2)
    state = OfulState(
        ridge=RidgeState.fresh(d, refactor_every=config.ridge.refactor_every),
        arms=arms,
        horizon=horizon,
        eta=eta,
        beta=b,
        delta_prime=delta_prime,
        max_stage=stage_ceiling(eta),
        spec=spec,
        backend=OracleBackend(backend),
        oracle_fail=config.adaptive.oracle_fail,
        config=config,
        rng=np.random.default_rng(rng_seed),
        index_seeds=index_seeds,
        active_arms=arms.ids.copy(),
    )
    logger.info(
        "oful init arms=%d dim=%d beta=%.4f eta=%.4g max_stage=%d q_bar=%.4g",
        arms.size, d, b, eta, state.max_stage, spec.q_bar,
    )
    _rebuild(state)
    return state


def query_vector(state: OfulState) -> np.ndarray:
    """vec(beta^2 4^s V^-1)."""
    return (state.beta**2 * 4.0**state.stage * state.ridge.gram_inv).reshape(-1)


def eliminate_and_advance(state: OfulState) -> OfulState:
    """Drop arms whose UCB is below the best LCB, move to the next stage, re-index."""
    if state.stage >= state.max_stage:
        raise ValueError(f"stage {state.stage} is already the last stage")

    with traced_span(get_tracer(), "oful.eliminate", stage=state.stage, active=int(state.active_arms.size)):
        X = state.arms.points[state.active_rows()]
        means = X @ state.ridge.theta_hat
        widths = state.beta * state.ridge.widths(X)
        r_low = float(np.max(means - widths))
        keep = means + widths >= r_low
        survivors = state.active_arms[keep]
        if survivors.size == 0:
            raise InvariantViolation(InvariantResult(
                passed=False, check="oful_survivors", observed=0.0, limit=1.0,
                message="elimination removed every arm",
            ))

        eliminated = state.active_arms.size - survivors.size
        state.active_arms = survivors
        state.stage += 1
        logger.info(
            "oful stage advanced stage=%d survivors=%d eliminated=%d r_low=%.6g step=%d",
            state.stage, survivors.size, eliminated, r_low, state.ridge.step,
        )
        _rebuild(state)
    return state


def oful_select(state: OfulState) -> Selection:
    """Arm for the current step; may advance stages while the index answers null."""
    probes = 0
    while state.stage < state.max_stage:
        q = query_vector(state)
        enforce(check_query_norm(float(np.linalg.norm(q)), state.spec.q_bar))
        outcome = state.mips.search(q)
        probes += outcome.probes
        if outcome.answer is not None:
            return Selection(
                arm=outcome.answer.id, probes=probes, tier=state.stage, value=outcome.answer.value
            )
        eliminate_and_advance(state)

    arm = int(state.rng.choice(state.active_arms))
    return Selection(arm=arm, probes=probes, tier=state.stage, randomized=True)


def oful_baseline_select(ridge: RidgeState, arms: PointSet, beta: float) -> int:
    """Exact argmax of x^T theta_hat + beta ||x||_{V^-1}."""
    ucb = arms.points @ ridge.theta_hat + beta * ridge.widths(arms.points)
    return exact_argmax(arms, ucb)


class OfulPolicy:
    """Accelerated OFUL driven by the adaptive MIPS index."""

    name = "oful"

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
        self.state = oful_init(arms, horizon, delta, eta, seed, backend, config)

    @property
    def arms(self) -> PointSet:
        return self.state.arms

    @property
    def ridge(self) -> RidgeState:
        return self.state.ridge

    def select(self) -> Selection:
        return oful_select(self.state)

    def update(self, arm: int, reward: float) -> None:
        self.state.ridge.update(self.arms.vector(arm), reward)

    def index_stats(self) -> list[IndexStats]:
        live = [self.state.mips.stats()] if self.state.mips is not None else []
        return [*self.state.retired, *live]


class OfulExactPolicy:
    """Linear-scan OFUL with beta(delta)."""

    name = "oful-exact"

    def __init__(
        self,
        arms: PointSet,
        horizon: int,
        delta: float,
        config: Optional[BanditMipsConfig] = None,
    ):
        config = config or BanditMipsConfig.default()
        self.arms = arms
        self.ridge = RidgeState.fresh(arms.dim, refactor_every=config.ridge.refactor_every)
        self.beta = confidence_beta(delta, arms.dim, horizon)

    def select(self) -> Selection:
        return Selection(arm=oful_baseline_select(self.ridge, self.arms, self.beta), probes=self.arms.size)

    def update(self, arm: int, reward: float) -> None:
        self.ridge.update(self.arms.vector(arm), reward)

    def index_stats(self) -> list[IndexStats]:
        return []
