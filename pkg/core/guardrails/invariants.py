"""
Bandit-MIPS Runtime Invariants

Each check returns an InvariantResult; enforce() turns the first failure
into an InvariantViolation. Checks:
1. Elliptical potential ceiling
2. Stage ceiling and index rebuild count (accelerated OFUL)
3. Query-norm guard for issued MIPS queries
4. Selection certificates (OFUL stage, LinTS level, MIPS soundness)
5. Per-step approximation loss of accelerated LinTS
"""
from __future__ import annotations
from typing import Iterable, Optional
import logging

from pydantic import BaseModel

from ..linalg.ridge import RidgeState

logger = logging.getLogger(__name__)

NUMERIC_SLACK = 1e-8


class InvariantResult(BaseModel):
    """Result of one invariant check."""
    passed: bool
    check: str
    observed: float
    limit: float
    message: str = ""


class InvariantViolation(AssertionError):
    def __init__(self, result: InvariantResult):
        self.result = result
        super().__init__(f"{result.check}: {result.message or 'failed'} (observed={result.observed:.10g}, limit={result.limit:.10g})")

    def __reduce__(self):
        return (InvariantViolation, (self.result,))


def _upper(check: str, observed: float, limit: float, message: str) -> InvariantResult:
    passed = observed <= limit
    return InvariantResult(
        passed=passed, check=check, observed=observed, limit=limit, message="" if passed else message
    )


def _lower(check: str, observed: float, limit: float, message: str) -> InvariantResult:
    passed = observed >= limit
    return InvariantResult(
        passed=passed, check=check, observed=observed, limit=limit, message="" if passed else message
    )


def check_elliptical_potential(potential: float, dim: int, horizon: int) -> InvariantResult:
    """sum ||x_t||^2_{V_t^-1} <= 2 d ln(1 + T/d)."""
    limit = float(RidgeState.potential_bound(dim, horizon)) + NUMERIC_SLACK
    return _upper("elliptical_potential", potential, limit, "potential above 2 d ln(1 + T/d)")


def check_stage_ceiling(stage: int, max_stage: int) -> InvariantResult:
    return _upper("stage_ceiling", float(stage), float(max_stage), "stage beyond ceil(log2(1/eta))")


def check_rebuilds(builds: int, max_stage: int) -> InvariantResult:
    return _upper("index_rebuilds", float(builds), float(max_stage), "more index builds than stages")


def check_query_norm(norm: float, q_bar: float) -> InvariantResult:
    return _upper("query_norm", norm, q_bar * (1.0 + 1e-12), "MIPS query outside the q_bar ball")


def check_sanity(value: float, threshold: float) -> InvariantResult:
    """Soundness of an index answer: <q, p> >= c r - eps."""
    return _lower("mips_soundness", value, threshold, "answer below c r - eps")


def check_oful_certificate(scaled_width_sq: float, eta: float) -> InvariantResult:
    """beta^2 4^s ||x||^2_{V^-1} >= 1/4 - 5/4 eta^2 for an arm returned at stage s."""
    limit = 0.25 - 1.25 * eta**2 - NUMERIC_SLACK
    return _lower("oful_certificate", scaled_width_sq, limit, "returned arm is not uncertain enough")


def check_level_certificate(value: float, level: int, q_bar: float, eta: float) -> InvariantResult:
    """x^T theta_tilde >= (1 - 1/(m+1)) (1 + beta + gamma) m eta - eta."""
    limit = (1.0 - 1.0 / (level + 1)) * q_bar * level * eta - eta - NUMERIC_SLACK
    return _lower("level_certificate", value, limit, f"arm does not clear level {level}")


def check_approx_loss(loss: float, beta: float, gamma: float, eta: float) -> InvariantResult:
    """J(theta_tilde) - x_a^T theta_tilde <= (3 + beta + gamma) eta."""
    limit = (3.0 + beta + gamma) * eta + NUMERIC_SLACK
    return _upper("approx_loss", loss, limit, "approximation loss above (3 + beta + gamma) eta")


def check_nonnegative_regret(regret: float) -> InvariantResult:
    return _lower("instant_regret", regret, -NUMERIC_SLACK, "negative instantaneous regret")


def first_failure(results: Iterable[InvariantResult]) -> Optional[InvariantResult]:
    for result in results:
        if not result.passed:
            return result
    return None


def enforce(results: Iterable[InvariantResult] | InvariantResult) -> None:
    """Raise InvariantViolation on the first failed result."""
    if isinstance(results, InvariantResult):
        results = [results]
    failed = first_failure(results)
    if failed is not None:
        logger.error("invariant violated check=%s observed=%.10g limit=%.10g", failed.check, failed.observed, failed.limit)
        raise InvariantViolation(failed)
