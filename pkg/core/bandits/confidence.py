"""
Confidence radii and closed-form regret ceilings.

beta(delta')  = 1 + sqrt(2 ln(1/delta') + d ln(1 + T/d))
gamma(delta') = beta(delta') sqrt(b d ln(b' d / delta'))

All logarithms are natural.
"""
from __future__ import annotations
from enum import Enum
import math


class EtaScheme(str, Enum):
    """Accuracy schedules eta(T)."""
    SQRT = "sqrt"            # 1 / sqrt(T)
    OFUL_EXP = "oful-exp"    # T^-0.12
    LINTS_EXP = "lints-exp"  # T^-0.24


_ETA_EXPONENTS = {
    EtaScheme.SQRT: 0.5,
    EtaScheme.OFUL_EXP: 0.12,
    EtaScheme.LINTS_EXP: 0.24,
}


def _check(dim: int, horizon: int) -> None:
    if dim < 1:
        raise ValueError(f"dim must be positive, got {dim}")
    if horizon < 1:
        raise ValueError(f"horizon must be at least 1, got {horizon}")


def beta(delta_prime: float, dim: int, horizon: int) -> float:
    if not 0.0 < delta_prime < 1.0:
        raise ValueError(f"delta' must be in (0, 1), got {delta_prime}")
    _check(dim, horizon)
    return 1.0 + math.sqrt(2.0 * math.log(1.0 / delta_prime) + dim * math.log1p(horizon / dim))


def gamma(beta_value: float, dim: int, delta_prime: float, b: float = 4.0, b_prime: float = 4.0) -> float:
    if not 0.0 < delta_prime < 1.0:
        raise ValueError(f"delta' must be in (0, 1), got {delta_prime}")
    return beta_value * math.sqrt(b * dim * math.log(b_prime * dim / delta_prime))


def max_stage(eta: float) -> int:
    """ceil(log2(1 / eta)), at least 1."""
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must be in (0, 1), got {eta}")
    return max(1, math.ceil(math.log2(1.0 / eta) - 1e-12))


def num_levels(eta: float) -> int:
    """ceil(1 / eta)."""
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must be in (0, 1), got {eta}")
    return math.ceil(1.0 / eta - 1e-12)


def oful_regret_bound(beta_value: float, dim: int, horizon: int, eta: float = 0.0) -> float:
    """16 beta sqrt(T d ln(1 + T/d)) + 40 eta T."""
    _check(dim, horizon)
    return 16.0 * beta_value * math.sqrt(horizon * dim * math.log1p(horizon / dim)) + 40.0 * eta * horizon


def lints_regret_bound(
    beta_value: float,
    gamma_value: float,
    dim: int,
    horizon: int,
    delta: float,
    eta: float = 0.0,
    p: float = 0.15,
) -> float:
    """Thompson-sampling ceiling including the (2 (3 + gamma + beta) / p) eta T approximation term."""
    _check(dim, horizon)
    spread = math.sqrt(2.0 * horizon * dim * math.log1p(horizon / dim))
    martingale = math.sqrt(8.0 * horizon * math.log(4.0 / delta))
    return (
        (4.0 * gamma_value / p) * (spread + martingale)
        + (gamma_value + beta_value) * spread
        + (2.0 * (3.0 + gamma_value + beta_value) / p) * eta * horizon
    )


def eta_for_horizon(horizon: int, scheme: EtaScheme | str = EtaScheme.SQRT) -> float:
    """eta(T) = T^-e for a preset schedule; T = 1 maps to 0.5 to keep eta below 1."""
    if horizon < 1:
        raise ValueError(f"horizon must be at least 1, got {horizon}")
    exponent = _ETA_EXPONENTS[EtaScheme(scheme)]
    if horizon == 1:
        return 0.5
    return float(horizon) ** -exponent
