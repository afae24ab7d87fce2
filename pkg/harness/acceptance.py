"""
Acceptance protocols.

Each protocol runs a Monte Carlo or sweep experiment and returns a
ProtocolReport; PROTOCOLS maps CLI names to the callables. Default sizes are
the full acceptance sizes; tests call them with smaller arguments.
"""
from __future__ import annotations
from typing import Any, Callable, Optional
import logging
import math

import numpy as np
from pydantic import BaseModel, Field
from scipy import stats

from core.bandits.sampler import TsSampler
from core.config import AdaptiveSettings, BanditMipsConfig, LshSettings
from core.env.simulator import InstanceKind
from core.mips.adaptive import AdaptiveMipsIndex, build_adaptive
from core.mips.lsh import LshIndex
from core.mips.oracle import OracleBackend
from core.mips.point_set import PointSet
from core.mips.reduction import MipsSpec, lift_points, lift_queries

from .config import Algorithm, RunConfig
from .runner import run_experiment, run_repetitions

logger = logging.getLogger(__name__)

CONFIDENCE = 0.99


class ProtocolReport(BaseModel):
    name: str
    passed: bool
    trials: int
    failures: int = 0
    rate: float = 0.0
    limit: float = 0.0
    details: dict[str, Any] = Field(default_factory=dict)


def _within_rate(failures: int, trials: int, rate: float) -> bool:
    """Failure count consistent with a true rate <= rate at 99% confidence."""
    if failures <= rate * trials:
        return True
    return stats.binomtest(failures, trials, rate, alternative="greater").pvalue >= 1.0 - CONFIDENCE


def _ball(rng: np.random.Generator, n: int, d: int, radius: float) -> np.ndarray:
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * (radius * rng.uniform(0.0, 1.0, size=(n, 1)) ** (1.0 / d))


# ---------------------------------------------------------------------------
# Reduction identity
# ---------------------------------------------------------------------------

def reduction_identity(samples: int = 100_000, d: int = 8, q_bar: float = 2.0, seed: int = 0) -> ProtocolReport:
    """|p' - q'|^2 against 2 - 2 <p, q> / q_bar on random pairs."""
    rng = np.random.default_rng(seed)
    P = _ball(rng, samples, d, 1.0)
    Q = _ball(rng, samples, d, q_bar)
    diff = lift_points(P) - lift_queries(Q, q_bar)
    lhs = np.einsum("ij,ij->i", diff, diff)
    rhs = 2.0 - 2.0 * np.einsum("ij,ij->i", P, Q) / q_bar
    worst = float(np.max(np.abs(lhs - rhs)))
    return ProtocolReport(
        name="reduction-identity", passed=worst < 1e-10, trials=samples,
        details={"max_abs_error": worst, "d": d, "q_bar": q_bar},
    )


# ---------------------------------------------------------------------------
# Adaptive contract
# ---------------------------------------------------------------------------

def _toward_boundary(index: AdaptiveMipsIndex, target: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Push a query toward the nearest hyperplane of the first hash table, plus jitter."""
    q = target.copy()
    first = index.oracles[0] if index.oracles else None
    if isinstance(first, LshIndex):
        normals = first.tables[0].planes[:, : q.size]
        norms = np.linalg.norm(normals, axis=1)
        margins = normals @ q / np.where(norms > 0, norms, 1.0)
        j = int(np.argmin(np.abs(margins)))
        q = q - 0.9 * margins[j] * normals[j] / max(norms[j], 1e-12)
    q = q + 0.05 * rng.standard_normal(q.size) / np.sqrt(q.size)
    return q / max(np.linalg.norm(q), 1e-12)


def adaptive_contract(
    builds: int = 500,
    queries: int = 200,
    K: int = 4096,
    d: int = 16,
    delta: float = 0.05,
    oracle_fail: float = 0.5,
    seed: int = 0,
    backend: OracleBackend = OracleBackend.LSH,
    max_oracles: Optional[int] = None,
    max_tables: Optional[int] = 512,
) -> ProtocolReport:
    """Fraction of index builds that miss any qualifying query of an adaptive sequence."""
    spec = MipsSpec(c=0.5, r=0.6, eps=0.1, q_bar=1.0, delta=delta)
    config = BanditMipsConfig(
        lsh=LshSettings(max_tables=max_tables),
        adaptive=AdaptiveSettings(oracle_fail=oracle_fail, max_oracles=max_oracles),
    )
    root = np.random.SeedSequence(seed)
    instance_rng = np.random.default_rng(root.spawn(1)[0])
    points = instance_rng.standard_normal((K, d))
    ps = PointSet(points / np.linalg.norm(points, axis=1, keepdims=True))
    lifted = lift_points(ps.points)
    threshold = spec.r + spec.eps
    scale = spec.q_bar * (1.0 - 1e-9)

    failed_builds = 0
    unsound = 0
    qualifying = 0
    for child in root.spawn(builds):
        build_seed, adversary_seed = child.spawn(2)
        index = build_adaptive(ps, spec, oracle_fail, build_seed, backend, config, lifted=lifted)
        rng = np.random.default_rng(adversary_seed)
        target = ps.points[int(rng.integers(K))]
        missed = False
        for _ in range(queries):
            q = scale * _toward_boundary(index, target, rng)
            answer = index.query(q)
            if float(np.max(ps.points @ q)) >= threshold:
                qualifying += 1
                missed = missed or answer is None
            if answer is not None:
                unsound += answer.value < spec.sanity_threshold
                target = ps.vector(answer.id)
            else:
                target = ps.points[int(rng.integers(K))]
        failed_builds += missed

    rate = failed_builds / builds
    return ProtocolReport(
        name="adaptive-contract",
        passed=unsound == 0 and _within_rate(failed_builds, builds, delta),
        trials=builds,
        failures=failed_builds,
        rate=rate,
        limit=delta,
        details={"unsound_answers": int(unsound), "qualifying_queries": qualifying, "queries_per_build": queries},
    )


# ---------------------------------------------------------------------------
# Bandit protocols
# ---------------------------------------------------------------------------

def regret_bound(
    algorithm: Algorithm = Algorithm.OFUL,
    runs: int = 100,
    K: int = 1000,
    d: int = 8,
    T: int = 2000,
    delta: float = 0.05,
    oracle: OracleBackend = OracleBackend.BRUTE,
    eta: Optional[float] = None,
    seed: int = 0,
    workers: int = 1,
) -> ProtocolReport:
    """Empirical regret under the closed-form ceiling in at least 1 - delta of seeded runs."""
    cfg = RunConfig(
        algorithm=algorithm, K=K, d=d, T=T, delta=delta, oracle=oracle, eta=eta,
        seed=seed, reps=runs, workers=workers, record_timing=False,
    )
    summaries = [r.summary for r in run_repetitions(cfg)]
    violations = sum(s.final_regret > s.bound for s in summaries)
    return ProtocolReport(
        name=f"regret-bound-{Algorithm(algorithm).value}",
        passed=violations <= int(delta * runs),
        trials=runs,
        failures=violations,
        rate=violations / runs,
        limit=delta,
        details={
            "max_ratio": max(s.bound_ratio for s in summaries),
            "max_index_builds": max(s.index_builds for s in summaries),
            "max_tier": max(s.max_tier for s in summaries),
        },
    )


def approx_loss(
    runs: int = 5,
    K: int = 1000,
    d: int = 8,
    T: int = 1000,
    delta: float = 0.05,
    oracle: OracleBackend = OracleBackend.BRUTE,
    eta: Optional[float] = None,
    seed: int = 0,
    max_oracles: Optional[int] = None,
) -> ProtocolReport:
    """Per-step approximation loss of accelerated LinTS.

    The brute backend enforces the bound on every step inside the run; the
    LSH backend only counts violations, which must stay below delta.
    """
    cfg = RunConfig(
        algorithm=Algorithm.LINTS, K=K, d=d, T=T, delta=delta, oracle=oracle, eta=eta,
        seed=seed, reps=runs, record_timing=False, max_oracles=max_oracles,
    )
    summaries = [r.summary for r in run_repetitions(cfg)]
    violations = sum(s.loss_violations for s in summaries)
    steps = runs * T
    return ProtocolReport(
        name="approx-loss",
        passed=violations <= delta * steps,
        trials=steps,
        failures=violations,
        rate=violations / steps,
        limit=delta,
        details={"fallbacks": sum(s.fallbacks for s in summaries)},
    )


def probe_scaling(
    Ks: tuple[int, ...] = (1024, 4096, 16384),
    d: int = 16,
    eta: float = 0.2,
    T: int = 50,
    delta: float = 0.05,
    seed: int = 0,
    algorithm: Algorithm = Algorithm.LINTS,
    oracle: OracleBackend = OracleBackend.LSH,
    max_oracles: Optional[int] = 8,
) -> ProtocolReport:
    """Mean probes per select must grow slower than K; exact scans grow exactly with K.

    The accelerated policy and its exact counterpart run on the same instances.
    The share of accelerated steps that fell back to an exact scan is reported.
    """
    baseline = Algorithm(f"{algorithm.family}-exact")
    means, exact_means, fallback_share = [], [], []
    for K in Ks:
        common = dict(
            K=K, d=d, T=T, eta=eta, delta=delta, oracle=oracle,
            instance=InstanceKind.SPHERE_UNIFORM, seed=seed, record_timing=False,
            check_invariants=False, max_oracles=max_oracles,
        )
        fast = run_experiment(RunConfig(algorithm=algorithm, **common)).summary
        exact = run_experiment(RunConfig(algorithm=baseline, **common)).summary
        means.append(fast.mean_probes)
        exact_means.append(exact.mean_probes)
        fallback_share.append(fast.fallbacks / T)
    k_growth = [Ks[i + 1] / Ks[i] for i in range(len(Ks) - 1)]
    growth = [means[i + 1] / means[i] if means[i] > 0 else float("inf") for i in range(len(Ks) - 1)]
    exact_growth = [exact_means[i + 1] / exact_means[i] for i in range(len(Ks) - 1)]
    sublinear = all(g < k for g, k in zip(growth, k_growth))
    linear_baseline = all(math.isclose(g, k, rel_tol=1e-12) for g, k in zip(exact_growth, k_growth))
    return ProtocolReport(
        name="probe-scaling",
        passed=sublinear and linear_baseline,
        trials=len(Ks),
        details={
            "K": list(Ks),
            "mean_probes": means,
            "probes_over_k": [m / k for m, k in zip(means, Ks)],
            "growth": growth,
            "baseline": baseline.value,
            "baseline_mean_probes": exact_means,
            "baseline_growth": exact_growth,
            "fallback_share": fallback_share,
        },
    )


def ts_constants(
    samples: int = 1_000_000,
    dims: tuple[int, ...] = (2, 8, 32),
    deltas: tuple[float, ...] = (0.1, 0.01),
    seed: int = 0,
    chunk: int = 100_000,
) -> ProtocolReport:
    """Anti-concentration P(u^T xi >= 1) >= p and concentration of |xi| for the Gaussian sampler."""
    rows = []
    passed = True
    for d in dims:
        sampler = TsSampler(d, seed)
        tail_hits = 0
        norms = []
        remaining = samples
        while remaining > 0:
            n = min(chunk, remaining)
            xi = sampler.sample_many(n)
            tail_hits += int(np.sum(xi[:, 0] >= 1.0))
            norms.append(np.linalg.norm(xi, axis=1))
            remaining -= n
        norms_all = np.concatenate(norms)
        anti = tail_hits / samples
        passed &= anti >= sampler.constants.p
        for delta in deltas:
            covered = float(np.mean(norms_all <= sampler.concentration_radius(delta)))
            passed &= covered >= 1.0 - delta
            rows.append({"d": d, "delta": delta, "anti_concentration": anti, "coverage": covered})
    return ProtocolReport(name="ts-constants", passed=bool(passed), trials=samples, details={"rows": rows})


def paired_divergence(
    runs: int = 20,
    K: int = 200,
    d: int = 8,
    T: int = 200,
    eta: float = 1e-6,
    delta: float = 0.05,
    seed: int = 0,
) -> ProtocolReport:
    """Accelerated vs exact LinTS with brute oracles and tiny eta pick the same arms."""
    base = dict(
        K=K, d=d, T=T, eta=eta, delta=delta, oracle=OracleBackend.BRUTE,
        instance=InstanceKind.PLANTED_GAP, seed=seed, record_timing=False,
    )
    divergent = 0
    for rep in range(runs):
        fast = run_experiment(RunConfig(algorithm=Algorithm.LINTS, **base), rep)
        exact = run_experiment(RunConfig(algorithm=Algorithm.LINTS_EXACT, **base), rep)
        divergent += int(np.sum(fast.trace.column("arm") != exact.trace.column("arm")))
    return ProtocolReport(
        name="paired-divergence", passed=divergent == 0, trials=runs * T, failures=divergent,
        rate=divergent / (runs * T),
    )


PROTOCOLS: dict[str, Callable[..., ProtocolReport]] = {
    "reduction-identity": reduction_identity,
    "adaptive-contract": adaptive_contract,
    "regret-bound": regret_bound,
    "approx-loss": approx_loss,
    "probe-scaling": probe_scaling,
    "ts-constants": ts_constants,
    "paired-divergence": paired_divergence,
}
