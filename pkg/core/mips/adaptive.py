"""
Adaptive approximate MIPS.

A single ANN oracle only succeeds with constant probability per query, and a
bandit picks each query from previous answers. Rounding queries to a lattice
of step eps/d makes the set of possible queries finite; kappa independent
oracle copies then drive the failure probability of the whole sequence
below delta by a union bound over the lattice.

Query path: round q, lift with the padded normalizer q_bar + eps/(2 sqrt d),
ask the copies in order, return the first candidate with <q, p> >= c r - eps
against the unrounded q.
"""
from __future__ import annotations
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional
import logging
import math

import numpy as np
from pydantic import BaseModel, Field

from ..config import BanditMipsConfig
from ..observability import get_tracer, traced_span
from .lsh import LshIndex, LshStats, build_lsh
from .oracle import AnnOracle, BruteForceOracle, OracleBackend
from .point_set import PointSet
from .reduction import AnnSpec, MipsSpec, ann_params, lift_points, lift_query

logger = logging.getLogger(__name__)

QUERY_NORM_SLACK = 1e-12


class IndexStats(BaseModel):
    """Per-index report exported by the harness."""
    backend: OracleBackend
    num_points: int
    dim: int
    kappa: int = Field(ge=1, description="Oracle copies queried")
    kappa_formula: int = Field(ge=1, description="Closed-form kappa before any cap")
    oracles_built: int
    lattice_step: float
    q_bar_lattice: float
    c_prime: Optional[float] = None
    r_prime: Optional[float] = None
    rho_q: Optional[float] = None
    queries: int = 0
    nulls: int = 0
    mean_probes: float = 0.0
    hits_per_oracle: list[int] = Field(default_factory=list)
    lsh: Optional[LshStats] = None


@dataclass(frozen=True, slots=True)
class MipsAnswer:
    id: int
    value: float
    oracle_index: int


@dataclass(frozen=True, slots=True)
class QueryOutcome:
    """Answer (or None) plus the work spent finding it."""
    answer: Optional[MipsAnswer]
    probes: int
    oracles_queried: int


def compute_kappa(
    num_points: int,
    dim: int,
    q_bar: float,
    eps: float,
    delta: float,
    oracle_fail: float,
) -> int:
    """kappa = ceil(d ln(K d q_bar / (eps delta)) / ln(1 / delta')), at least 1."""
    if eps <= 0:
        raise ValueError(f"eps must be positive for a lattice to exist, got {eps}")
    if not 0.0 < oracle_fail < 1.0:
        raise ValueError(f"oracle failure probability must be in (0, 1), got {oracle_fail}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    numerator = dim * math.log(num_points * dim * q_bar / (eps * delta))
    return max(1, math.ceil(numerator / math.log(1.0 / oracle_fail)))


def round_to_lattice(q, step: float) -> np.ndarray:
    """Nearest multiple of step per coordinate; halves round toward +inf."""
    if step <= 0:
        raise ValueError(f"lattice step must be positive, got {step}")
    q = np.asarray(q, dtype=np.float64)
    return np.floor(q / step + 0.5) * step


class AdaptiveMipsIndex:
    """kappa oracle copies over one PointSet answering (c, r, eps, q_bar)-MIPS."""

    def __init__(
        self,
        ps: PointSet,
        spec: MipsSpec,
        oracles: tuple[AnnOracle, ...],
        kappa: int,
        kappa_formula: int,
        backend: OracleBackend,
        ann: Optional[AnnSpec],
    ):
        self.ps = ps
        self.spec = spec
        self.oracles = oracles
        self.kappa = kappa
        self.kappa_formula = kappa_formula
        self.backend = backend
        self.ann = ann
        self.lattice_step = spec.eps / ps.dim
        self.q_bar_lattice = spec.q_bar + spec.eps / (2.0 * math.sqrt(ps.dim))

        self._queries = 0
        self._nulls = 0
        self._probes = 0
        self._hits = [0] * kappa

    @property
    def never_answers(self) -> bool:
        """No oracle exists: the threshold lies outside every lifted query's reach."""
        return not self.oracles

    def _oracle(self, i: int) -> AnnOracle:
        # brute copies are shared, LSH copies are one per slot
        return self.oracles[i] if len(self.oracles) == self.kappa else self.oracles[0]

    def search(self, q) -> QueryOutcome:
        """Full query with probe accounting."""
        q = np.asarray(q, dtype=np.float64).reshape(-1)
        if q.shape != (self.ps.dim,):
            raise ValueError(f"query has shape {q.shape}, expected ({self.ps.dim},)")
        if not np.all(np.isfinite(q)):
            raise ValueError("query has non-finite components")
        norm = float(np.linalg.norm(q))
        if norm > self.spec.q_bar * (1.0 + QUERY_NORM_SLACK):
            raise ValueError(f"query norm {norm:.6g} exceeds q_bar={self.spec.q_bar:.6g}")

        self._queries += 1
        if self.never_answers:
            self._nulls += 1
            return QueryOutcome(answer=None, probes=0, oracles_queried=0)

        q_lifted = lift_query(round_to_lattice(q, self.lattice_step), self.q_bar_lattice)
        threshold = self.spec.sanity_threshold
        probes = 0
        for i in range(self.kappa):
            oracle = self._oracle(i)
            result = oracle.query(q_lifted)
            probes += result.probes
            if result.row is not None:
                value = float(self.ps.points[result.row] @ q)
                if value >= threshold:
                    self._probes += probes
                    self._hits[i] += 1
                    answer = MipsAnswer(id=int(self.ps.ids[result.row]), value=value, oracle_index=i)
                    return QueryOutcome(answer=answer, probes=probes, oracles_queried=i + 1)
            if oracle.deterministic:
                break

        self._probes += probes
        self._nulls += 1
        return QueryOutcome(answer=None, probes=probes, oracles_queried=min(i + 1, self.kappa))

    def query(self, q) -> Optional[MipsAnswer]:
        return self.search(q).answer

    def stats(self) -> IndexStats:
        first = self.oracles[0] if self.oracles else None
        return IndexStats(
            backend=self.backend,
            num_points=self.ps.size,
            dim=self.ps.dim,
            kappa=self.kappa,
            kappa_formula=self.kappa_formula,
            oracles_built=len(self.oracles),
            lattice_step=self.lattice_step,
            q_bar_lattice=self.q_bar_lattice,
            c_prime=self.ann.c_prime if self.ann else None,
            r_prime=self.ann.r_prime if self.ann else None,
            rho_q=self.ann.rho_q if self.ann else None,
            queries=self._queries,
            nulls=self._nulls,
            mean_probes=self._probes / self._queries if self._queries else 0.0,
            hits_per_oracle=list(self._hits),
            lsh=first.stats() if isinstance(first, LshIndex) else None,
        )


def build_adaptive(
    ps: PointSet,
    spec: MipsSpec,
    oracle_fail: float,
    seed: int | np.random.SeedSequence,
    backend: OracleBackend = OracleBackend.LSH,
    config: Optional[BanditMipsConfig] = None,
    lifted: Optional[np.ndarray] = None,
) -> AdaptiveMipsIndex:
    """Build kappa independent oracle copies over ps for the given contract.

    lifted may carry precomputed lift_points(ps.points) so that several
    indexes over the same points share one lifted matrix.
    """
    if spec.eps <= 0:
        raise ValueError("eps = 0 leaves the query lattice undefined")
    if not 0.0 < oracle_fail < 1.0:
        raise ValueError(f"oracle failure probability must be in (0, 1), got {oracle_fail}")
    config = config or BanditMipsConfig.default()
    backend = OracleBackend(backend)

    kappa_formula = compute_kappa(ps.size, ps.dim, spec.q_bar, spec.eps, spec.delta, oracle_fail)
    kappa = kappa_formula
    cap = config.adaptive.max_oracles
    if cap is not None and kappa > cap:
        logger.warning("adaptive kappa capped formula=%d cap=%d", kappa_formula, cap)
        kappa = cap

    if lifted is None:
        lifted = lift_points(ps.points)

    q_bar_lat = spec.q_bar + spec.eps / (2.0 * math.sqrt(ps.dim))
    if spec.r >= q_bar_lat:
        logger.debug("adaptive index never answers r=%.6g q_bar_lat=%.6g", spec.r, q_bar_lat)
        return AdaptiveMipsIndex(ps, spec, (), kappa, kappa_formula, backend, None)
    ann = ann_params(spec.model_copy(update={"q_bar": q_bar_lat}))

    with traced_span(get_tracer(), "mips.build_adaptive", kappa=kappa, backend=backend.value, points=ps.size):
        if backend is OracleBackend.BRUTE:
            oracles: tuple[AnnOracle, ...] = (BruteForceOracle(lifted, ann),)
        else:
            root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
            children = root.spawn(kappa)

            def build_one(child: np.random.SeedSequence) -> AnnOracle:
                return build_lsh(lifted, ann, oracle_fail, child, config.lsh)

            if config.adaptive.workers > 1:
                with ThreadPoolExecutor(max_workers=config.adaptive.workers) as pool:
                    oracles = tuple(pool.map(build_one, children))
            else:
                oracles = tuple(build_one(child) for child in children)

    logger.debug(
        "adaptive index built kappa=%d backend=%s points=%d c_prime=%.4f r_prime=%.4f rho_q=%.4f",
        kappa, backend.value, ps.size, ann.c_prime, ann.r_prime, ann.rho_q,
    )
    return AdaptiveMipsIndex(ps, spec, oracles, kappa, kappa_formula, backend, ann)
