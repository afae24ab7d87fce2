"""
Experiment runner.

Each (config, repetition) pair derives three independent seed streams from
SeedSequence([seed, rep]): instance, environment noise and algorithm. An
accelerated run and its exact baseline with the same config therefore see
the same arms, theta* and noise, so regret differences come from the
selection rule alone.
"""
from __future__ import annotations
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional
import logging
import math
import time

import numpy as np
from pydantic import BaseModel

from core.bandits.base import BanditPolicy, Selection
from core.bandits.confidence import beta as confidence_beta
from core.bandits.confidence import gamma as confidence_gamma
from core.bandits.confidence import lints_regret_bound, oful_regret_bound
from core.bandits.lints import LinTsExactPolicy, LinTsPolicy
from core.bandits.oful import OfulExactPolicy, OfulPolicy
from core.config import BanditMipsConfig, TsConstants
from core.env.simulator import Environment, RegretTrace, make_instance
from core.guardrails.invariants import (
    InvariantResult,
    check_approx_loss,
    check_elliptical_potential,
    check_level_certificate,
    check_nonnegative_regret,
    check_oful_certificate,
    check_rebuilds,
    check_stage_ceiling,
    enforce,
)
from core.mips.adaptive import IndexStats
from core.mips.oracle import OracleBackend
from core.mips.point_set import PointSet
from core.observability import get_tracer, traced_span

from .config import Algorithm, RunConfig

logger = logging.getLogger(__name__)


class RunSummary(BaseModel):
    """One summary row per repetition."""
    algorithm: Algorithm
    rep: int
    instance_seed: int
    K: int
    d: int
    T: int
    eta: float
    delta: float
    oracle: OracleBackend
    final_regret: float
    bound: float
    bound_ratio: float
    mean_probes: float
    probes_over_k: float
    index_builds: int
    max_tier: int
    fallbacks: int
    norm_violations: int
    loss_violations: int
    optimal_arm: int
    optimal_pulls_tail: int
    potential: float
    potential_bound: float
    select_micros_median: float
    select_micros_p99: float


class BoundReport(BaseModel):
    family: str
    bound: float
    empirical_regret: float
    ratio: float
    within: bool
    beta: float
    gamma: Optional[float] = None
    eta: float


@dataclass
class ExperimentResult:
    config: RunConfig
    rep: int
    trace: RegretTrace
    summary: RunSummary
    index_stats: list[IndexStats] = field(default_factory=list)


def seed_streams(seed: int, rep: int) -> tuple[np.random.SeedSequence, np.random.SeedSequence, np.random.SeedSequence]:
    """(instance, noise, algorithm) streams for one repetition."""
    instance, noise, algorithm = np.random.SeedSequence([seed, rep]).spawn(3)
    return instance, noise, algorithm


def make_policy(
    cfg: RunConfig,
    arms: PointSet,
    seed: np.random.SeedSequence,
    config: Optional[BanditMipsConfig] = None,
) -> BanditPolicy:
    config = config or cfg.library_config()
    if cfg.algorithm is Algorithm.OFUL:
        return OfulPolicy(arms, cfg.T, cfg.delta, cfg.resolved_eta, seed, cfg.oracle, config)
    if cfg.algorithm is Algorithm.OFUL_EXACT:
        return OfulExactPolicy(arms, cfg.T, cfg.delta, config)
    if cfg.algorithm is Algorithm.LINTS:
        return LinTsPolicy(arms, cfg.T, cfg.delta, cfg.resolved_eta, seed, cfg.oracle, config)
    return LinTsExactPolicy(arms, cfg.T, cfg.delta, seed, config)


def evaluate_bound(
    family: str,
    d: int,
    T: int,
    delta: float,
    eta: float,
    ts: Optional[TsConstants] = None,
) -> tuple[float, float, Optional[float]]:
    """(bound, beta, gamma) for the OFUL or LinTS regret ceiling."""
    ts = ts or TsConstants()
    if family == "oful":
        b = confidence_beta(delta / 2.0, d, T)
        return oful_regret_bound(b, d, T, eta), b, None
    delta_prime = delta / (4.0 * T)
    b = confidence_beta(delta_prime, d, T)
    g = confidence_gamma(b, d, delta_prime, ts.b, ts.b_prime)
    return lints_regret_bound(b, g, d, T, delta, eta, ts.p), b, g


def compare_bound(trace: RegretTrace, cfg: RunConfig) -> BoundReport:
    """Closed-form regret ceiling for the run's parameters against its empirical regret."""
    bound, b, g = evaluate_bound(cfg.algorithm.family, cfg.d, cfg.T, cfg.delta, cfg.bound_eta)
    regret = trace.cumulative_regret
    return BoundReport(
        family=cfg.algorithm.family,
        bound=bound,
        empirical_regret=regret,
        ratio=regret / bound if bound > 0 else math.inf,
        within=regret <= bound,
        beta=b,
        gamma=g,
        eta=cfg.bound_eta,
    )


class _StepChecker:
    """Per-step invariant bookkeeping for one run."""

    def __init__(self, cfg: RunConfig, policy: BanditPolicy):
        self.cfg = cfg
        self.policy = policy
        self.loss_violations = 0

    def check(self, sel: Selection, regret: float) -> Optional[float]:
        results: list[InvariantResult] = [check_nonnegative_regret(regret)]
        loss: Optional[float] = None
        policy = self.policy
        if isinstance(policy, OfulPolicy):
            state = policy.state
            results.append(check_stage_ceiling(state.stage, state.max_stage))
            results.append(check_rebuilds(state.builds, state.max_stage))
            if sel.value is not None:
                results.append(check_oful_certificate(sel.value, state.eta))
        elif isinstance(policy, LinTsPolicy):
            state = policy.state
            theta_tilde = state.theta_tilde
            if sel.value is not None and sel.tier > 0:
                results.append(check_level_certificate(sel.value, sel.tier, state.q_bar, state.eta))
            if theta_tilde is not None:
                scores = policy.arms.points @ theta_tilde
                loss = float(scores.max() - scores[policy.arms.row(sel.arm)])
                loss_check = check_approx_loss(loss, state.beta, state.gamma, state.eta)
                if state.ladder.backend is OracleBackend.BRUTE:
                    results.append(loss_check)
                elif not loss_check.passed:
                    self.loss_violations += 1
        enforce(results)
        return loss


def _index_builds(policy: BanditPolicy) -> int:
    if isinstance(policy, OfulPolicy):
        return policy.state.builds
    if isinstance(policy, LinTsPolicy):
        return policy.state.ladder.built
    return 0


def _summarize(
    cfg: RunConfig,
    rep: int,
    instance_seed: int,
    env: Environment,
    policy: BanditPolicy,
    trace: RegretTrace,
    loss_violations: int,
) -> RunSummary:
    probes = trace.column("probes").astype(float)
    micros = trace.column("select_micros").astype(float)
    arms = trace.column("arm")
    tiers = trace.column("stage_or_level")
    bound, _, _ = evaluate_bound(cfg.algorithm.family, cfg.d, cfg.T, cfg.delta, cfg.bound_eta)
    regret = trace.cumulative_regret
    state = getattr(policy, "state", None)
    return RunSummary(
        algorithm=cfg.algorithm,
        rep=rep,
        instance_seed=instance_seed,
        K=cfg.K,
        d=cfg.d,
        T=cfg.T,
        eta=cfg.bound_eta,
        delta=cfg.delta,
        oracle=cfg.oracle,
        final_regret=regret,
        bound=bound,
        bound_ratio=regret / bound if bound > 0 else math.inf,
        mean_probes=float(probes.mean()),
        probes_over_k=float(probes.mean()) / cfg.K,
        index_builds=_index_builds(policy),
        max_tier=int(tiers.max()) if tiers.size else 0,
        fallbacks=int(trace.column("fallback").sum()),
        norm_violations=getattr(state, "norm_violations", 0),
        loss_violations=loss_violations,
        optimal_arm=env.optimal_arm,
        optimal_pulls_tail=int(np.sum(arms[-50:] == env.optimal_arm)),
        potential=policy.ridge.potential,
        potential_bound=float(policy.ridge.potential_bound(cfg.d, cfg.T)),
        select_micros_median=float(np.median(micros)),
        select_micros_p99=float(np.percentile(micros, 99)),
    )


def run_experiment(cfg: RunConfig, rep: int = 0) -> ExperimentResult:
    """Full bandit loop for one repetition; deterministic per (config, rep)."""
    instance_ss, noise_ss, algorithm_ss = seed_streams(cfg.seed, rep)
    instance_seed = int(instance_ss.generate_state(1)[0])
    env = make_instance(
        cfg.instance, cfg.K, cfg.d, instance_seed,
        noise_std=cfg.noise_std, gap=cfg.gap, clusters=cfg.clusters, noise_seed=noise_ss,
    )
    trace = RegretTrace()

    with traced_span(get_tracer(), "harness.run", algorithm=cfg.algorithm.value, rep=rep, K=cfg.K, d=cfg.d, T=cfg.T):
        policy = make_policy(cfg, env.arms, algorithm_ss)
        checker = _StepChecker(cfg, policy)
        for _ in range(cfg.T):
            start = time.perf_counter_ns()
            sel = policy.select()
            micros = (time.perf_counter_ns() - start) / 1000.0 if cfg.record_timing else 0.0

            reward = env.pull(sel.arm)
            regret = env.regret(sel.arm)
            loss = checker.check(sel, regret) if cfg.check_invariants else None
            policy.update(sel.arm, reward)
            trace.append(
                arm=sel.arm,
                reward=reward,
                regret=regret,
                probes=sel.probes,
                stage_or_level=sel.tier,
                select_micros=micros,
                fallback=sel.fallback,
                approx_loss=loss,
            )

        if cfg.check_invariants:
            enforce(check_elliptical_potential(policy.ridge.potential, cfg.d, cfg.T))

    summary = _summarize(cfg, rep, instance_seed, env, policy, trace, checker.loss_violations)
    logger.info(
        "run done algorithm=%s rep=%d regret=%.4f bound=%.4f mean_probes=%.1f builds=%d",
        cfg.algorithm.value, rep, summary.final_regret, summary.bound, summary.mean_probes, summary.index_builds,
    )
    return ExperimentResult(config=cfg, rep=rep, trace=trace, summary=summary, index_stats=policy.index_stats())


def run_repetitions(cfg: RunConfig) -> list[ExperimentResult]:
    """cfg.reps independent repetitions, in parallel processes when cfg.workers > 1."""
    reps = list(range(cfg.reps))
    if cfg.workers > 1 and cfg.reps > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(run_experiment, [cfg] * len(reps), reps))
    return [run_experiment(cfg, rep) for rep in reps]
